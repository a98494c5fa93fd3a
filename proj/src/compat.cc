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

#include "bcompat/compat.h"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

#include "bcompat/error.h"

namespace bcompat {

UpdateComparison Align(PredictionLog h1, PredictionLog h2,
                       bool allow_partial) {
  ValidateLog(h1);
  ValidateLog(h2);
  if (h1.label_set != h2.label_set) {
    throw Error(ErrorCode::kLabelSetMismatch,
                "label sets of '" + h1.model_id + "' and '" + h2.model_id +
                    "' differ");
  }
  std::unordered_map<std::string, size_t> h2_by_id;
  h2_by_id.reserve(h2.records.size());
  for (size_t i = 0; i < h2.records.size(); ++i) {
    h2_by_id.emplace(h2.records[i].example_id, i);
  }

  UpdateComparison cmp;
  for (size_t i = 0; i < h1.records.size(); ++i) {
    const auto it = h2_by_id.find(h1.records[i].example_id);
    if (it == h2_by_id.end()) continue;
    cmp.aligned_ids_.push_back(h1.records[i].example_id);
    cmp.h1_index_.push_back(i);
    cmp.h2_index_.push_back(it->second);
  }
  if (!allow_partial && (cmp.aligned_ids_.size() != h1.records.size() ||
                         cmp.aligned_ids_.size() != h2.records.size())) {
    throw Error(ErrorCode::kIdSetMismatch,
                "'" + h1.model_id + "' has " +
                    std::to_string(h1.records.size()) + " ids, '" +
                    h2.model_id + "' has " +
                    std::to_string(h2.records.size()) + ", " +
                    std::to_string(cmp.aligned_ids_.size()) +
                    " shared; pass allow_partial to compare the "
                    "intersection");
  }
  if (cmp.aligned_ids_.empty()) {
    throw Error(ErrorCode::kEmptyIntersection,
                "'" + h1.model_id + "' and '" + h2.model_id +
                    "' share no example ids");
  }
  cmp.h1_ = std::move(h1);
  cmp.h2_ = std::move(h2);
  return cmp;
}

Quadrant QuadrantOf(bool h1_correct, bool h2_correct) {
  if (h1_correct) return h2_correct ? Quadrant::kBothCorrect : Quadrant::kH1cH2w;
  return h2_correct ? Quadrant::kH1wH2c : Quadrant::kBothWrong;
}

const char* QuadrantName(Quadrant q) {
  switch (q) {
    case Quadrant::kBothCorrect: return "both_correct";
    case Quadrant::kBothWrong: return "both_wrong";
    case Quadrant::kH1cH2w: return "h1c_h2w";
    case Quadrant::kH1wH2c: return "h1w_h2c";
  }
  return "unknown";
}

namespace {

void Tally(Quadrants& q, Quadrant which) {
  switch (which) {
    case Quadrant::kBothCorrect: ++q.both_correct; break;
    case Quadrant::kBothWrong: ++q.both_wrong; break;
    case Quadrant::kH1cH2w: ++q.h1c_h2w; break;
    case Quadrant::kH1wH2c: ++q.h1w_h2c; break;
  }
}

MetricValue Ratio(size_t kept, size_t lost) {
  if (kept + lost == 0) return {1.0, true};
  return {static_cast<double>(kept) / static_cast<double>(kept + lost), false};
}

MetricValue BtcFrom(const Quadrants& q) {
  return Ratio(q.both_correct, q.h1c_h2w);
}

MetricValue BecFrom(const Quadrants& q) {
  return Ratio(q.both_wrong, q.h1c_h2w);
}

}  // namespace

Quadrants CountQuadrants(const UpdateComparison& cmp) {
  Quadrants q;
  for (size_t i = 0; i < cmp.size(); ++i) {
    Tally(q, QuadrantOf(cmp.h1_record(i).correct(), cmp.h2_record(i).correct()));
  }
  return q;
}

MetricValue Btc(const UpdateComparison& cmp) {
  return BtcFrom(CountQuadrants(cmp));
}

MetricValue Bec(const UpdateComparison& cmp) {
  return BecFrom(CountQuadrants(cmp));
}

CompatibilityReport Compare(const UpdateComparison& cmp) {
  CompatibilityReport report;
  for (size_t i = 0; i < cmp.size(); ++i) {
    const auto& r1 = cmp.h1_record(i);
    const auto q = QuadrantOf(r1.correct(), cmp.h2_record(i).correct());
    Tally(report.quadrants, q);
    if (q == Quadrant::kH1cH2w) report.incompatible_ids.push_back(r1.example_id);
  }
  std::sort(report.incompatible_ids.begin(), report.incompatible_ids.end());
  const auto btc = BtcFrom(report.quadrants);
  const auto bec = BecFrom(report.quadrants);
  report.btc = btc.value;
  report.bec = bec.value;
  report.btc_denominator_zero = btc.denominator_zero;
  report.bec_denominator_zero = bec.denominator_zero;
  const auto& q = report.quadrants;
  const double n = static_cast<double>(cmp.size());
  report.acc_h1 = static_cast<double>(q.both_correct + q.h1c_h2w) / n;
  report.acc_h2 = static_cast<double>(q.both_correct + q.h1w_h2c) / n;
  report.accuracy_gain = report.acc_h2 - report.acc_h1;
  return report;
}

namespace {

// Group of `tags` within `ns`, if any.
std::optional<std::string> TagInNamespace(const std::vector<std::string>& tags,
                                          const std::string& ns,
                                          const std::string& example_id) {
  std::optional<std::string> found;
  for (const auto& tag : tags) {
    std::optional<std::string> value;
    const auto colon = tag.find(':');
    if (colon == std::string::npos) {
      if (tag == ns) value = tag;
    } else if (tag.compare(0, colon, ns) == 0 && colon == ns.size()) {
      value = tag.substr(colon + 1);
    }
    if (!value) continue;
    if (found && *found != *value) {
      throw Error(ErrorCode::kInvalidArgument,
                  "example '" + example_id + "' has two tags in namespace '" +
                      ns + "'");
    }
    found = std::move(value);
  }
  return found;
}

void FinishRow(GroupRow& row, size_t total_incompatible) {
  const auto& q = row.quadrants;
  row.count = q.total();
  const double n = static_cast<double>(row.count);
  row.acc_h1 = static_cast<double>(q.both_correct + q.h1c_h2w) / n;
  row.acc_h2 = static_cast<double>(q.both_correct + q.h1w_h2c) / n;
  row.gain = row.acc_h2 - row.acc_h1;
  row.incompatible_count = q.h1c_h2w;
  row.incompatible_share =
      total_incompatible == 0
          ? 0.0
          : static_cast<double>(q.h1c_h2w) /
                static_cast<double>(total_incompatible);
}

}  // namespace

std::vector<GroupRow> GroupBreakdown(const UpdateComparison& cmp,
                                     GroupBy grouping,
                                     const std::string& tag_namespace) {
  // Keys preserve output order: label position, or (is_none, name).
  std::map<std::pair<int, std::string>, GroupRow> rows;
  std::map<Label, int> label_pos;
  for (size_t k = 0; k < cmp.h1().label_set.size(); ++k) {
    label_pos[cmp.h1().label_set[k]] = static_cast<int>(k);
  }
  bool namespace_seen = false;
  size_t total_incompatible = 0;
  for (size_t i = 0; i < cmp.size(); ++i) {
    const auto& r1 = cmp.h1_record(i);
    const auto& r2 = cmp.h2_record(i);
    std::pair<int, std::string> key;
    if (grouping == GroupBy::kTrueLabel) {
      key = {label_pos.at(r1.true_label), std::to_string(r1.true_label)};
    } else {
      // h1's tags are authoritative; h2 repeats them in well-formed logs.
      auto group = TagInNamespace(r1.groups, tag_namespace, r1.example_id);
      if (group) {
        namespace_seen = true;
        key = {0, *group};
      } else {
        key = {1, kNoGroup};
      }
    }
    GroupRow& row = rows[key];
    row.group = key.second;
    const auto q = QuadrantOf(r1.correct(), r2.correct());
    Tally(row.quadrants, q);
    if (q == Quadrant::kH1cH2w) ++total_incompatible;
  }
  if (grouping == GroupBy::kTag && !namespace_seen) {
    throw Error(ErrorCode::kUnknownTagNamespace,
                "no record carries a tag in namespace '" + tag_namespace + "'");
  }
  std::vector<GroupRow> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) {
    FinishRow(row, total_incompatible);
    out.push_back(std::move(row));
  }
  return out;
}

ConfidenceHistogram IncompatibleConfidenceHistogram(const UpdateComparison& cmp,
                                                    WhichModel which,
                                                    size_t bin_count) {
  if (bin_count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bin count must be positive");
  }
  ConfidenceHistogram hist;
  hist.lo = 1.0 / static_cast<double>(cmp.h1().label_set.size());
  hist.hi = 1.0;
  hist.counts.assign(bin_count, 0);
  const double width = (hist.hi - hist.lo) / static_cast<double>(bin_count);
  for (size_t b = 0; b <= bin_count; ++b) {
    hist.edges.push_back(b == bin_count ? hist.hi
                                        : hist.lo + width * static_cast<double>(b));
  }

  std::vector<std::string> missing;
  for (size_t i = 0; i < cmp.size(); ++i) {
    const auto& r1 = cmp.h1_record(i);
    const auto& r2 = cmp.h2_record(i);
    if (QuadrantOf(r1.correct(), r2.correct()) != Quadrant::kH1cH2w) continue;
    const auto& conf = which == WhichModel::kH1 ? r1.confidence : r2.confidence;
    if (!conf) {
      missing.push_back(r1.example_id);
      continue;
    }
    size_t bin = 0;
    if (width > 0.0 && *conf > hist.lo) {
      bin = static_cast<size_t>((*conf - hist.lo) / width);
      bin = std::min(bin, bin_count - 1);
    }
    ++hist.counts[bin];
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (size_t k = 0; k < missing.size() && k < 20; ++k) {
      if (k) list += ", ";
      list += missing[k];
    }
    if (missing.size() > 20) list += ", ...";
    throw Error(ErrorCode::kMissingConfidence,
                std::to_string(missing.size()) +
                    " incompatible records lack a confidence: " + list);
  }
  return hist;
}

}  // namespace bcompat
