// Copyright 2026 The bcompat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bcompat/forgetting.h"

#include <cmath>
#include <limits>

#include "bcompat/error.h"
#include "bcompat/text_io.h"

namespace bcompat {
namespace {

constexpr Quadrant kQuadrants[] = {Quadrant::kBothCorrect, Quadrant::kBothWrong,
                                   Quadrant::kH1cH2w, Quadrant::kH1wH2c};

const std::map<std::string, int>& Covering(const ForgettingCounts& counts,
                                           const UpdateComparison& cmp,
                                           const char* model) {
  for (const auto& id : cmp.aligned_ids()) {
    if (!counts.counts.count(id)) {
      throw Error(ErrorCode::kIdCoverageMismatch,
                  std::string("forgetting counts for ") + model +
                      " miss example '" + id + "'");
    }
  }
  return counts.counts;
}

}  // namespace

ForgettingCounts CountForgettingEvents(const EpochEvalLog& log) {
  if (log.epochs() == 0) {
    throw Error(ErrorCode::kEmptyLog,
                "evaluation log '" + log.dataset_id + "' has no epochs");
  }
  ForgettingCounts out;
  out.epochs_observed = log.epochs();
  for (size_t i = 0; i < log.example_ids.size(); ++i) {
    int events = 0;
    for (size_t e = 1; e < log.epochs(); ++e) {
      events += log.correct[e - 1][i] && !log.correct[e][i];
    }
    out.counts[log.example_ids[i]] = events;
  }
  return out;
}

const ForgettingCell& ForgettingTable::at(Quadrant q, WhichModel m) const {
  for (const auto& cell : cells) {
    if (cell.quadrant == q && cell.model == m) return cell;
  }
  throw Error(ErrorCode::kInvalidArgument, "no such forgetting cell");
}

ForgettingTable ForgettingByQuadrant(const UpdateComparison& cmp,
                                     const ForgettingCounts& h1,
                                     const ForgettingCounts& h2) {
  const auto& c1 = Covering(h1, cmp, "h1");
  const auto& c2 = Covering(h2, cmp, "h2");
  ForgettingTable table;
  for (const Quadrant q : kQuadrants) {
    for (const WhichModel m : {WhichModel::kH1, WhichModel::kH2}) {
      const auto& counts = m == WhichModel::kH1 ? c1 : c2;
      double sum = 0.0;
      double sum_sq = 0.0;
      size_t n = 0;
      for (size_t i = 0; i < cmp.size(); ++i) {
        if (QuadrantOf(cmp.h1_record(i).correct(), cmp.h2_record(i).correct()) !=
            q) {
          continue;
        }
        const double v = counts.at(cmp.aligned_ids()[i]);
        sum += v;
        sum_sq += v * v;
        ++n;
      }
      ForgettingCell cell{q, m, std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN(), n};
      if (n > 0) {
        cell.mean = sum / static_cast<double>(n);
        const double var = sum_sq / static_cast<double>(n) - cell.mean * cell.mean;
        cell.stddev = std::sqrt(std::max(0.0, var));
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

std::string ForgettingTableCsv(const ForgettingTable& table) {
  std::string out = "quadrant,model,mean,std,n\n";
  for (const auto& cell : table.cells) {
    out += QuadrantName(cell.quadrant);
    out += cell.model == WhichModel::kH1 ? ",h1," : ",h2,";
    out += FormatDouble(cell.mean) + "," + FormatDouble(cell.stddev) + "," +
           std::to_string(cell.n) + "\n";
  }
  return out;
}

}  // namespace bcompat
