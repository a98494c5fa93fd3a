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

#include "bcompat/noise.h"

#include <algorithm>
#include <cmath>

#include "bcompat/error.h"
#include "bcompat/rng.h"

namespace bcompat {
namespace {

// Salts keep the streams of different corruption kinds apart under one seed.
constexpr uint64_t kSwapSalt = 0x5357'4150;
constexpr uint64_t kOcclusionSalt = 0x4f43'434c;
constexpr uint64_t kOutlierSalt = 0x4f55'544c;
constexpr uint64_t kGroupSalt = 0x4752'4f55;

Rng InstanceStream(uint64_t seed, uint64_t salt, const std::string& id) {
  return Rng(DeriveSeed({seed, salt, HashString(id)}));
}

void CheckRate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise rate must lie in [0, 1]");
  }
}

void CheckLabel(const Dataset& d, Label l) {
  if (!d.HasLabel(l)) {
    throw Error(ErrorCode::kUnknownLabel,
                "label " + std::to_string(l) + " is not in the label set");
  }
}

void CheckPair(const Dataset& d, Label a, Label b) {
  CheckLabel(d, a);
  CheckLabel(d, b);
  if (a == b) {
    throw Error(ErrorCode::kIdenticalPair,
                "labels must differ, got " + std::to_string(a) + " twice");
  }
}

}  // namespace

std::string_view NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kLabelSwap: return "label_swap";
    case NoiseKind::kFeatureOcclusion: return "feature_occlusion";
    case NoiseKind::kOutlierMerge: return "outlier_merge";
    case NoiseKind::kGroupFlip: return "group_flip";
  }
  return "unknown";
}

NoiseKind ParseNoiseKind(std::string_view name) {
  for (const auto kind : {NoiseKind::kLabelSwap, NoiseKind::kFeatureOcclusion,
                          NoiseKind::kOutlierMerge, NoiseKind::kGroupFlip}) {
    if (NoiseKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown noise kind '" + std::string(name) + "'");
}

Dataset InjectLabelNoise(const Dataset& d, Label a, Label b, double rate,
                         uint64_t seed) {
  CheckPair(d, a, b);
  CheckRate(rate);
  Dataset out = d;
  for (auto& inst : out.instances) {
    if (inst.label != a && inst.label != b) continue;
    Rng rng = InstanceStream(seed, kSwapSalt, inst.id);
    if (rng.Bernoulli(rate)) inst.label = inst.label == a ? b : a;
  }
  return out;
}

OcclusionGeometry OcclusionFor(const FeatureShape& shape, double area_fraction) {
  const double total = static_cast<double>(shape.height) * shape.width;
  // The slack absorbs representation error, e.g. 0.05 * 60 = 3.0000000000000004.
  const auto area =
      static_cast<size_t>(std::ceil(area_fraction * total - 1e-9 * total));
  OcclusionGeometry g;
  g.pixels = area;
  if (area == 0) return g;
  g.height = std::min(shape.height,
                      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(area)))));
  g.width = static_cast<int>((area + g.height - 1) / g.height);
  if (g.width > shape.width) {
    g.width = shape.width;
    g.height = static_cast<int>((area + g.width - 1) / g.width);
  }
  return g;
}

Dataset InjectFeatureOcclusion(const Dataset& d, Label target, double rate,
                               uint64_t seed, double area_fraction,
                               double fill_value) {
  if (!d.feature_shape) {
    throw Error(ErrorCode::kNoShape,
                "occlusion needs a dataset with a feature_shape");
  }
  if (!(area_fraction > 0.0 && area_fraction < 1.0)) {
    throw Error(ErrorCode::kBadAreaFraction,
                "area fraction must lie strictly between 0 and 1");
  }
  CheckLabel(d, target);
  CheckRate(rate);
  const FeatureShape shape = *d.feature_shape;
  const OcclusionGeometry g = OcclusionFor(shape, area_fraction);
  Dataset out = d;
  for (auto& inst : out.instances) {
    if (inst.label != target) continue;
    Rng rng = InstanceStream(seed, kOcclusionSalt, inst.id);
    if (!rng.Bernoulli(rate)) continue;
    const int top = static_cast<int>(rng.UniformInt(shape.height - g.height + 1));
    const int left = static_cast<int>(rng.UniformInt(shape.width - g.width + 1));
    size_t filled = 0;
    for (int r = 0; r < g.height && filled < g.pixels; ++r) {
      for (int c = 0; c < g.width && filled < g.pixels; ++c, ++filled) {
        const size_t base =
            (static_cast<size_t>(top + r) * shape.width + (left + c)) *
            shape.channels;
        for (int ch = 0; ch < shape.channels; ++ch) {
          inst.features[base + ch] = fill_value;
        }
      }
    }
  }
  return out;
}

Dataset InjectOutlierNoise(const Dataset& d, Label outlier, Label target,
                           double rate, uint64_t seed) {
  CheckPair(d, outlier, target);
  CheckRate(rate);
  Dataset out;
  out.feature_shape = d.feature_shape;
  for (const Label l : d.label_set) {
    if (l != outlier) out.label_set.push_back(l);
  }
  out.instances.reserve(d.instances.size());
  for (const auto& inst : d.instances) {
    if (inst.label != outlier) {
      out.instances.push_back(inst);
      continue;
    }
    Rng rng = InstanceStream(seed, kOutlierSalt, inst.id);
    if (rng.Bernoulli(rate)) {
      out.instances.push_back(inst);
      out.instances.back().label = target;
    }
  }
  return out;
}

Dataset InjectGroupFlip(const Dataset& d, const std::string& group_tag,
                        double rate, uint64_t seed) {
  if (d.label_set.size() != 2) {
    throw Error(ErrorCode::kNotBinary,
                "group flips need a binary label set, got " +
                    std::to_string(d.label_set.size()) + " labels");
  }
  CheckRate(rate);
  const bool tagged = std::any_of(
      d.instances.begin(), d.instances.end(),
      [&](const Instance& inst) { return inst.HasGroup(group_tag); });
  if (!tagged) {
    throw Error(ErrorCode::kUnknownGroup,
                "no instance carries group tag '" + group_tag + "'");
  }
  const Label a = d.label_set[0];
  const Label b = d.label_set[1];
  Dataset out = d;
  for (auto& inst : out.instances) {
    if (!inst.HasGroup(group_tag)) continue;
    Rng rng = InstanceStream(seed, kGroupSalt, inst.id);
    if (rng.Bernoulli(rate)) inst.label = inst.label == a ? b : a;
  }
  return out;
}

Dataset ApplyNoise(const Dataset& d, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::kLabelSwap:
      return InjectLabelNoise(d, spec.label_a, spec.label_b, spec.rate,
                              spec.seed);
    case NoiseKind::kFeatureOcclusion:
      return InjectFeatureOcclusion(d, spec.target_label, spec.rate, spec.seed,
                                    spec.area_fraction, spec.fill_value);
    case NoiseKind::kOutlierMerge:
      return InjectOutlierNoise(d, spec.outlier_label, spec.target_label,
                                spec.rate, spec.seed);
    case NoiseKind::kGroupFlip:
      return InjectGroupFlip(d, spec.group_tag, spec.rate, spec.seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown noise kind");
}

std::vector<Label> NoiseTargetLabels(const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::kLabelSwap: return {spec.label_a, spec.label_b};
    case NoiseKind::kFeatureOcclusion: return {spec.target_label};
    case NoiseKind::kOutlierMerge: return {spec.target_label};
    case NoiseKind::kGroupFlip: return {};
  }
  return {};
}

}  // namespace bcompat
