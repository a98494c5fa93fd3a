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

// Synthetic datasets for desk-scale experiments.
//
// The class geometry (cluster centers, glyph templates, vocabularies) comes
// from `geometry_seed` and stays fixed, while `seed` drives sampling, so a
// train and a test set drawn with different seeds share one distribution.
// Labels cycle through the classes, so every kind is balanced by
// construction.

#ifndef BCOMPAT_SYNTH_H_
#define BCOMPAT_SYNTH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bcompat/dataset.h"

namespace bcompat {

enum class SynthKind {
  kBlobsBinary,      // Two unit-variance Gaussians at -/+ (offset, offset).
  kBlobsMulticlass,  // `classes` Gaussian clusters in `dim` dimensions.
  kGlyphGrid,        // 12x12x1 noisy stroke glyphs, `classes` templates.
  kTokensBinary,     // Bag-of-tokens sentiment with a planted token group.
};

std::string_view SynthKindName(SynthKind kind);
// Accepts "blobs-binary", "blobs-multiclass", "glyph-grid", "tokens-binary".
SynthKind ParseSynthKind(std::string_view name);

struct SynthOptions {
  SynthKind kind = SynthKind::kBlobsBinary;
  size_t size = 1000;
  uint64_t seed = 0;
  uint64_t geometry_seed = 0;
  std::string id_prefix = "x";

  // kBlobsBinary.
  double mean_offset = 0.5;
  // kBlobsMulticlass.
  int classes = 10;
  int dim = 10;
  double center_scale = 1.5;
  double cluster_std = 1.0;
  // kGlyphGrid.
  double pixel_noise = 0.25;
  // kTokensBinary: fraction of instances carrying `group_tag`.
  double group_fraction = 0.2;
  std::string group_tag = "genre:comedy";
};

Dataset Synthesize(const SynthOptions& options);

// The token ids used by kTokensBinary, exposed for tests and docs.
struct TokenVocabulary {
  static constexpr int kGeneralPositive = 0;   // 10 tokens
  static constexpr int kGeneralNegative = 10;  // 10 tokens
  static constexpr int kGroupPositive = 20;    // 5 tokens
  static constexpr int kGroupNegative = 25;    // 5 tokens
  static constexpr int kGroupMarker = 30;      // 1 token
  static constexpr int kNeutral = 31;          // 19 tokens
  static constexpr int kSize = 50;
};

}  // namespace bcompat

#endif  // BCOMPAT_SYNTH_H_
