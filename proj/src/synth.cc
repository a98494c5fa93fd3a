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

#include "bcompat/synth.h"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "bcompat/error.h"
#include "bcompat/rng.h"

namespace bcompat {
namespace {

constexpr int kGlyphSide = 12;
constexpr int kStrokesPerGlyph = 3;
constexpr int kTokensPerDocument = 12;

std::string InstanceId(const SynthOptions& o, size_t i) {
  return fmt::format("{}-{:06d}", o.id_prefix, i);
}

Dataset BlobsBinary(const SynthOptions& o) {
  Dataset d;
  d.label_set = {0, 1};
  Rng rng(DeriveSeed({o.seed, 1}));
  for (size_t i = 0; i < o.size; ++i) {
    const Label y = static_cast<Label>(i % 2);
    const double sign = y == 0 ? -1.0 : 1.0;
    Instance inst;
    inst.id = InstanceId(o, i);
    inst.label = y;
    for (int k = 0; k < 2; ++k) {
      inst.features.push_back(sign * o.mean_offset + rng.Normal());
    }
    d.instances.push_back(std::move(inst));
  }
  return d;
}

Dataset BlobsMulticlass(const SynthOptions& o) {
  if (o.classes < 2 || o.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "blobs-multiclass needs classes >= 2 and dim >= 1");
  }
  Rng geometry(DeriveSeed({o.geometry_seed, 2}));
  std::vector<std::vector<double>> centers(o.classes);
  for (auto& c : centers) {
    for (int k = 0; k < o.dim; ++k) c.push_back(o.center_scale * geometry.Normal());
  }
  Dataset d;
  for (int l = 0; l < o.classes; ++l) d.label_set.push_back(l);
  Rng rng(DeriveSeed({o.seed, 3}));
  for (size_t i = 0; i < o.size; ++i) {
    const Label y = static_cast<Label>(i % o.classes);
    Instance inst;
    inst.id = InstanceId(o, i);
    inst.label = y;
    for (int k = 0; k < o.dim; ++k) {
      inst.features.push_back(centers[y][k] + o.cluster_std * rng.Normal());
    }
    d.instances.push_back(std::move(inst));
  }
  return d;
}

using Glyph = std::array<double, kGlyphSide * kGlyphSide>;

std::vector<Glyph> GlyphTemplates(int classes, uint64_t geometry_seed) {
  Rng rng(DeriveSeed({geometry_seed, 4}));
  std::vector<Glyph> templates(classes);
  for (auto& g : templates) {
    g.fill(0.0);
    for (int s = 0; s < kStrokesPerGlyph; ++s) {
      const int r0 = 1 + static_cast<int>(rng.UniformInt(kGlyphSide - 2));
      const int c0 = 1 + static_cast<int>(rng.UniformInt(kGlyphSide - 2));
      const int r1 = 1 + static_cast<int>(rng.UniformInt(kGlyphSide - 2));
      const int c1 = 1 + static_cast<int>(rng.UniformInt(kGlyphSide - 2));
      const int steps = std::max({std::abs(r1 - r0), std::abs(c1 - c0), 1});
      for (int t = 0; t <= steps; ++t) {
        const int r = r0 + static_cast<int>(std::lround(
                               static_cast<double>(r1 - r0) * t / steps));
        const int c = c0 + static_cast<int>(std::lround(
                               static_cast<double>(c1 - c0) * t / steps));
        g[r * kGlyphSide + c] = 1.0;
      }
    }
  }
  return templates;
}

Dataset GlyphGrid(const SynthOptions& o) {
  if (o.classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "glyph-grid needs classes >= 2");
  }
  const auto templates = GlyphTemplates(o.classes, o.geometry_seed);
  Dataset d;
  d.feature_shape = FeatureShape{kGlyphSide, kGlyphSide, 1};
  for (int l = 0; l < o.classes; ++l) d.label_set.push_back(l);
  Rng rng(DeriveSeed({o.seed, 5}));
  for (size_t i = 0; i < o.size; ++i) {
    const Label y = static_cast<Label>(i % o.classes);
    const int dr = static_cast<int>(rng.UniformInt(3)) - 1;
    const int dc = static_cast<int>(rng.UniformInt(3)) - 1;
    const double intensity = rng.Uniform(0.7, 1.0);
    Instance inst;
    inst.id = InstanceId(o, i);
    inst.label = y;
    inst.features.resize(kGlyphSide * kGlyphSide);
    for (int r = 0; r < kGlyphSide; ++r) {
      for (int c = 0; c < kGlyphSide; ++c) {
        const int sr = r - dr;
        const int sc = c - dc;
        double v = 0.0;
        if (sr >= 0 && sr < kGlyphSide && sc >= 0 && sc < kGlyphSide) {
          v = intensity * templates[y][sr * kGlyphSide + sc];
        }
        v += o.pixel_noise * rng.Normal();
        inst.features[r * kGlyphSide + c] = std::clamp(v, 0.0, 1.0);
      }
    }
    d.instances.push_back(std::move(inst));
  }
  return d;
}

// Draws one token for a document of label `y`. Documents in the planted
// group express sentiment mostly through group-specific tokens.
int DrawToken(Rng& rng, Label y, bool in_group) {
  using V = TokenVocabulary;
  const double u = rng.Uniform();
  const int general_same = y == 1 ? V::kGeneralPositive : V::kGeneralNegative;
  const int general_other = y == 1 ? V::kGeneralNegative : V::kGeneralPositive;
  const int group_same = y == 1 ? V::kGroupPositive : V::kGroupNegative;
  const int group_other = y == 1 ? V::kGroupNegative : V::kGroupPositive;
  if (!in_group) {
    if (u < 0.22) return general_same + static_cast<int>(rng.UniformInt(10));
    if (u < 0.30) return general_other + static_cast<int>(rng.UniformInt(10));
  } else {
    if (u < 0.06) return general_same + static_cast<int>(rng.UniformInt(10));
    if (u < 0.09) return general_other + static_cast<int>(rng.UniformInt(10));
    if (u < 0.27) return group_same + static_cast<int>(rng.UniformInt(5));
    if (u < 0.34) return group_other + static_cast<int>(rng.UniformInt(5));
  }
  return V::kNeutral + static_cast<int>(rng.UniformInt(V::kSize - V::kNeutral));
}

Dataset TokensBinary(const SynthOptions& o) {
  using V = TokenVocabulary;
  if (!(o.group_fraction >= 0.0 && o.group_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "group_fraction must lie in [0, 1]");
  }
  Dataset d;
  d.label_set = {0, 1};
  Rng rng(DeriveSeed({o.seed, 6}));
  // Group membership by a running quota gives an exact fraction that is
  // independent of the label cycle.
  double quota = 0.0;
  for (size_t i = 0; i < o.size; ++i) {
    const Label y = static_cast<Label>(i % 2);
    quota += o.group_fraction;
    const bool in_group = quota >= 1.0 - 1e-9;
    if (in_group) quota -= 1.0;
    Instance inst;
    inst.id = InstanceId(o, i);
    inst.label = y;
    inst.features.assign(V::kSize, 0.0);
    if (in_group) {
      inst.features[V::kGroupMarker] = 1.0;
      inst.groups.push_back(o.group_tag);
    }
    for (int t = 0; t < kTokensPerDocument; ++t) {
      inst.features[DrawToken(rng, y, in_group)] += 1.0;
    }
    d.instances.push_back(std::move(inst));
  }
  return d;
}

}  // namespace

std::string_view SynthKindName(SynthKind kind) {
  switch (kind) {
    case SynthKind::kBlobsBinary: return "blobs-binary";
    case SynthKind::kBlobsMulticlass: return "blobs-multiclass";
    case SynthKind::kGlyphGrid: return "glyph-grid";
    case SynthKind::kTokensBinary: return "tokens-binary";
  }
  return "unknown";
}

SynthKind ParseSynthKind(std::string_view name) {
  for (const auto kind : {SynthKind::kBlobsBinary, SynthKind::kBlobsMulticlass,
                          SynthKind::kGlyphGrid, SynthKind::kTokensBinary}) {
    if (SynthKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown dataset kind '" + std::string(name) + "'");
}

Dataset Synthesize(const SynthOptions& options) {
  switch (options.kind) {
    case SynthKind::kBlobsBinary: return BlobsBinary(options);
    case SynthKind::kBlobsMulticlass: return BlobsMulticlass(options);
    case SynthKind::kGlyphGrid: return GlyphGrid(options);
    case SynthKind::kTokensBinary: return TokensBinary(options);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown dataset kind");
}

}  // namespace bcompat
