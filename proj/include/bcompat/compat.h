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

// Backward-compatibility metrics for a model update h1 -> h2.
//
// Both models are evaluated on the same test set. Every aligned example falls
// in one quadrant of (h1 correct?, h2 correct?):
//
//                  h2 correct     h2 wrong
//   h1 correct     both_correct   h1c_h2w   (incompatible)
//   h1 wrong       h1w_h2c        both_wrong
//
// BTC = both_correct / (both_correct + h1c_h2w)  -- trust preserved
// BEC = both_wrong   / (both_wrong   + h1c_h2w)  -- h2 errors that are not new
//
// An empty denominator yields 1.0 together with a degenerate flag.

#ifndef BCOMPAT_COMPAT_H_
#define BCOMPAT_COMPAT_H_

#include <cstddef>
#include <string>
#include <vector>

#include "bcompat/prediction_log.h"

namespace bcompat {

// An aligned (h1, h2) pair of logs; the unit of all compatibility analysis.
// Construct with Align().
class UpdateComparison {
 public:
  const PredictionLog& h1() const { return h1_; }
  const PredictionLog& h2() const { return h2_; }
  const std::vector<std::string>& aligned_ids() const { return aligned_ids_; }
  size_t size() const { return aligned_ids_.size(); }

  // Records of the i-th aligned example.
  const PredictionRecord& h1_record(size_t i) const {
    return h1_.records[h1_index_[i]];
  }
  const PredictionRecord& h2_record(size_t i) const {
    return h2_.records[h2_index_[i]];
  }

 private:
  friend UpdateComparison Align(PredictionLog, PredictionLog, bool);

  PredictionLog h1_;
  PredictionLog h2_;
  std::vector<std::string> aligned_ids_;
  std::vector<size_t> h1_index_;
  std::vector<size_t> h2_index_;
};

// Aligns two logs on their common example ids, in h1 order. Both logs are
// validated first. Throws kLabelSetMismatch when the label sets differ,
// kIdSetMismatch when the id sets differ and `allow_partial` is false, and
// kEmptyIntersection when no id is shared.
UpdateComparison Align(PredictionLog h1, PredictionLog h2,
                       bool allow_partial = false);

struct Quadrants {
  size_t both_correct = 0;
  size_t both_wrong = 0;
  size_t h1c_h2w = 0;
  size_t h1w_h2c = 0;

  size_t total() const { return both_correct + both_wrong + h1c_h2w + h1w_h2c; }
  bool operator==(const Quadrants&) const = default;
};

enum class Quadrant { kBothCorrect, kBothWrong, kH1cH2w, kH1wH2c };

Quadrant QuadrantOf(bool h1_correct, bool h2_correct);
const char* QuadrantName(Quadrant q);

Quadrants CountQuadrants(const UpdateComparison& cmp);

struct MetricValue {
  double value = 1.0;
  bool denominator_zero = false;
};

MetricValue Btc(const UpdateComparison& cmp);
MetricValue Bec(const UpdateComparison& cmp);

struct CompatibilityReport {
  double btc = 1.0;
  double bec = 1.0;
  Quadrants quadrants;
  double acc_h1 = 0.0;
  double acc_h2 = 0.0;
  double accuracy_gain = 0.0;
  bool btc_denominator_zero = false;
  bool bec_denominator_zero = false;
  // h1 correct, h2 wrong; sorted by example id.
  std::vector<std::string> incompatible_ids;
};

CompatibilityReport Compare(const UpdateComparison& cmp);

enum class GroupBy { kTrueLabel, kTag };

// Group keys for kTag: a tag "ns:value" belongs to namespace "ns" with group
// "value"; a bare tag "t" is its own namespace with group "t". Records with
// no tag in the namespace form the "(none)" group.
inline constexpr const char* kNoGroup = "(none)";

struct GroupRow {
  std::string group;
  size_t count = 0;
  Quadrants quadrants;
  double acc_h1 = 0.0;
  double acc_h2 = 0.0;
  double gain = 0.0;
  size_t incompatible_count = 0;
  // Share of all incompatible points; 0 when there are none.
  double incompatible_share = 0.0;
};

// One row per group. For kTrueLabel rows follow the label set order; for kTag
// rows are sorted by group name with "(none)" last. Throws
// kUnknownTagNamespace when no record carries a tag of `tag_namespace`, and
// kInvalidArgument when a record carries two tags of the namespace.
std::vector<GroupRow> GroupBreakdown(const UpdateComparison& cmp,
                                     GroupBy grouping,
                                     const std::string& tag_namespace = "");

enum class WhichModel { kH1, kH2 };

struct ConfidenceHistogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> edges;  // bin_count + 1 uniform edges.
  std::vector<size_t> counts;
};

// Histogram of the chosen model's confidence over the incompatible points,
// on [1/|labels|, 1]. The last bin is closed; values below the range fall in
// the first bin. Throws kMissingConfidence naming the offending ids.
ConfidenceHistogram IncompatibleConfidenceHistogram(const UpdateComparison& cmp,
                                                    WhichModel which,
                                                    size_t bin_count);

}  // namespace bcompat

#endif  // BCOMPAT_COMPAT_H_
