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

#include "bcompat/report_io.h"

#include <algorithm>

#include <fmt/format.h>

#include "bcompat/text_io.h"
#include "json.hpp"

namespace bcompat {
namespace {

using OrderedJson = nlohmann::ordered_json;

OrderedJson QuadrantsJson(const Quadrants& q) {
  OrderedJson j;
  j["both_correct"] = q.both_correct;
  j["both_wrong"] = q.both_wrong;
  j["h1c_h2w"] = q.h1c_h2w;
  j["h1w_h2c"] = q.h1w_h2c;
  return j;
}

OrderedJson MetricsJson(const CompatibilityReport& r) {
  OrderedJson j;
  j["btc"] = r.btc;
  j["bec"] = r.bec;
  j["btc_denominator_zero"] = r.btc_denominator_zero;
  j["bec_denominator_zero"] = r.bec_denominator_zero;
  j["quadrants"] = QuadrantsJson(r.quadrants);
  j["acc_h1"] = r.acc_h1;
  j["acc_h2"] = r.acc_h2;
  j["accuracy_gain"] = r.accuracy_gain;
  j["incompatible_ids"] = r.incompatible_ids;
  return j;
}

OrderedJson GroupsJson(const std::vector<GroupRow>& rows) {
  OrderedJson out = OrderedJson::array();
  for (const auto& g : rows) {
    OrderedJson j;
    j["group"] = g.group;
    j["count"] = g.count;
    j["quadrants"] = QuadrantsJson(g.quadrants);
    j["acc_h1"] = g.acc_h1;
    j["acc_h2"] = g.acc_h2;
    j["gain"] = g.gain;
    j["incompatible_count"] = g.incompatible_count;
    j["incompatible_share"] = g.incompatible_share;
    out.push_back(j);
  }
  return out;
}

std::string OptionalConfidence(const std::optional<double>& c) {
  return c ? FormatDouble(*c) : "";
}

std::string JoinGroups(const std::vector<std::string>& groups) {
  std::string out;
  for (const auto& g : groups) out += (out.empty() ? "" : ";") + g;
  return out;
}

}  // namespace

std::string ReportJson(const UpdateComparison& cmp,
                       const CompatibilityReport& report) {
  OrderedJson j;
  j["h1"] = cmp.h1().model_id;
  j["h2"] = cmp.h2().model_id;
  j["size"] = cmp.size();
  j.update(MetricsJson(report));
  return j.dump(2) + "\n";
}

std::string GroupRowsCsv(const std::vector<GroupRow>& rows) {
  std::string out =
      "group,count,both_correct,both_wrong,h1c_h2w,h1w_h2c,acc_h1,acc_h2,gain,"
      "incompatible_count,incompatible_share\n";
  for (const auto& g : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", CsvField(g.group),
                       g.count, g.quadrants.both_correct, g.quadrants.both_wrong,
                       g.quadrants.h1c_h2w, g.quadrants.h1w_h2c,
                       FormatDouble(g.acc_h1), FormatDouble(g.acc_h2),
                       FormatDouble(g.gain), g.incompatible_count,
                       FormatDouble(g.incompatible_share));
  }
  return out;
}

std::string IncompatibleCsv(const UpdateComparison& cmp) {
  std::vector<size_t> rows;
  for (size_t i = 0; i < cmp.size(); ++i) {
    if (cmp.h1_record(i).correct() && !cmp.h2_record(i).correct()) {
      rows.push_back(i);
    }
  }
  std::sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
    return cmp.aligned_ids()[a] < cmp.aligned_ids()[b];
  });
  std::string out = "id,true_label,h1_pred,h2_pred,h1_conf,h2_conf,groups\n";
  for (const size_t i : rows) {
    const auto& r1 = cmp.h1_record(i);
    const auto& r2 = cmp.h2_record(i);
    out += fmt::format("{},{},{},{},{},{},{}\n", CsvField(r1.example_id),
                       r1.true_label, r1.predicted_label, r2.predicted_label,
                       OptionalConfidence(r1.confidence),
                       OptionalConfidence(r2.confidence),
                       CsvField(JoinGroups(r1.groups)));
  }
  return out;
}

std::string HistogramCsv(const ConfidenceHistogram& hist) {
  std::string out = "bin,lo,hi,count\n";
  for (size_t b = 0; b < hist.counts.size(); ++b) {
    out += fmt::format("{},{},{},{}\n", b, FormatDouble(hist.edges[b]),
                       FormatDouble(hist.edges[b + 1]), hist.counts[b]);
  }
  return out;
}

std::string SummaryLine(const CompatibilityReport& report) {
  return fmt::format("BTC={:.4f} BEC={:.4f} ΔAcc={:+.4f}", report.btc,
                     report.bec, report.accuracy_gain);
}

std::string TrialJson(const TrialResult& t) {
  OrderedJson j;
  j["trial"] = t.trial_index;
  j["axis_value"] = t.axis_value ? OrderedJson(*t.axis_value) : OrderedJson();
  j["seeds"]["h1"] = t.seed_h1;
  j["seeds"]["h2"] = t.seed_h2;
  j["seeds"]["noise"] = t.noise_seed ? OrderedJson(*t.noise_seed) : OrderedJson();
  j["report"] = MetricsJson(t.report);
  j["label_groups"] = GroupsJson(t.label_groups);
  if (!t.tag_groups.empty()) j["tag_groups"] = GroupsJson(t.tag_groups);
  if (t.subgroup_acc_h1) j["subgroup_acc_h1"] = *t.subgroup_acc_h1;
  if (t.subgroup_acc_h2) j["subgroup_acc_h2"] = *t.subgroup_acc_h2;
  if (t.forgetting) {
    OrderedJson cells = OrderedJson::array();
    for (const auto& c : t.forgetting->cells) {
      OrderedJson cell;
      cell["quadrant"] = QuadrantName(c.quadrant);
      cell["model"] = c.model == WhichModel::kH1 ? "h1" : "h2";
      cell["mean"] = c.mean;
      cell["std"] = c.stddev;
      cell["n"] = c.n;
      cells.push_back(cell);
    }
    j["forgetting"] = cells;
  }
  return j.dump(2) + "\n";
}

}  // namespace bcompat
