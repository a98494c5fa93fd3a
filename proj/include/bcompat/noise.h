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

// Structured, seeded corruptions of training data.
//
// Every per-instance decision is drawn from a stream keyed by (seed, example
// id), so the set of corrupted instances does not depend on dataset order and
// the same seed at a higher rate corrupts a superset of the instances
// corrupted at a lower rate. Instances outside the targeted labels or group
// are copied bit for bit.

#ifndef BCOMPAT_NOISE_H_
#define BCOMPAT_NOISE_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "bcompat/dataset.h"

namespace bcompat {

enum class NoiseKind { kLabelSwap, kFeatureOcclusion, kOutlierMerge, kGroupFlip };

std::string_view NoiseKindName(NoiseKind kind);
// Accepts "label_swap", "feature_occlusion", "outlier_merge", "group_flip".
NoiseKind ParseNoiseKind(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kLabelSwap;
  double rate = 0.0;
  uint64_t seed = 0;
  // kLabelSwap: the swapped pair.
  Label label_a = 0;
  Label label_b = 0;
  // kFeatureOcclusion: occluded class. kOutlierMerge: class outliers join.
  Label target_label = 0;
  double area_fraction = 0.2;
  double fill_value = 0.0;
  // kOutlierMerge: class removed from the task.
  Label outlier_label = 0;
  // kGroupFlip: exact group tag to corrupt.
  std::string group_tag;
};

// Swaps a <-> b on each instance of either label with probability `rate`.
Dataset InjectLabelNoise(const Dataset& d, Label a, Label b, double rate,
                         uint64_t seed);

// Occludes each `target` instance with probability `rate` by filling exactly
// ceil(area_fraction * H * W) pixels (all channels) inside one near-square
// rectangle at a uniform position.
Dataset InjectFeatureOcclusion(const Dataset& d, Label target, double rate,
                               uint64_t seed, double area_fraction = 0.2,
                               double fill_value = 0.0);

// Removes `outlier` from the task. Each outlier instance is kept relabeled as
// `target` with probability `rate` and dropped otherwise.
Dataset InjectOutlierNoise(const Dataset& d, Label outlier, Label target,
                           double rate, uint64_t seed);

// Flips the binary label of each instance tagged `group_tag` with
// probability `rate`.
Dataset InjectGroupFlip(const Dataset& d, const std::string& group_tag,
                        double rate, uint64_t seed);

Dataset ApplyNoise(const Dataset& d, const NoiseSpec& spec);

// Rectangle used for a given image size and area fraction. `pixels` is the
// number filled: all full rows of the rectangle plus a partial last row.
struct OcclusionGeometry {
  int height = 0;
  int width = 0;
  size_t pixels = 0;
};
OcclusionGeometry OcclusionFor(const FeatureShape& shape, double area_fraction);

// Labels targeted by `spec`, used to define the "noisy subgroup"
// of an experiment: the swapped pair, the occluded class, or the class that
// receives outliers. Empty for group flips.
std::vector<Label> NoiseTargetLabels(const NoiseSpec& spec);

}  // namespace bcompat

#endif  // BCOMPAT_NOISE_H_
