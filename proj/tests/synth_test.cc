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

#include <cmath>
#include <map>

#include "bcompat/error.h"
#include "gtest/gtest.h"

namespace bcompat {
namespace {

SynthOptions Options(SynthKind kind, size_t size, uint64_t seed) {
  SynthOptions o;
  o.kind = kind;
  o.size = size;
  o.seed = seed;
  return o;
}

TEST(Synth, EveryKindIsValidBalancedAndDeterministic) {
  for (const auto kind : {SynthKind::kBlobsBinary, SynthKind::kBlobsMulticlass,
                          SynthKind::kGlyphGrid, SynthKind::kTokensBinary}) {
    SCOPED_TRACE(std::string(SynthKindName(kind)));
    const auto o = Options(kind, 200, 7);
    const Dataset d = Synthesize(o);
    ValidateDataset(d);
    ASSERT_EQ(d.size(), 200u);
    std::map<Label, int> counts;
    for (const auto& inst : d.instances) ++counts[inst.label];
    EXPECT_EQ(counts.size(), d.label_set.size());
    for (const auto& [label, n] : counts) {
      EXPECT_EQ(n, 200 / static_cast<int>(d.label_set.size()));
    }
    EXPECT_EQ(Synthesize(o), d);
    EXPECT_NE(Synthesize(Options(kind, 200, 8)), d);
    EXPECT_EQ(ParseSynthKind(SynthKindName(kind)), kind);
  }
  EXPECT_THROW(ParseSynthKind("spirals"), Error);
}

TEST(Synth, BlobsBinaryMeans) {
  const Dataset d = Synthesize(Options(SynthKind::kBlobsBinary, 20000, 1));
  double sum[2][2] = {{0, 0}, {0, 0}};
  for (const auto& inst : d.instances) {
    sum[inst.label][0] += inst.features[0];
    sum[inst.label][1] += inst.features[1];
  }
  // Standard error of each mean is 1 / sqrt(10000) = 0.01.
  EXPECT_NEAR(sum[0][0] / 10000, -0.5, 0.05);
  EXPECT_NEAR(sum[0][1] / 10000, -0.5, 0.05);
  EXPECT_NEAR(sum[1][0] / 10000, 0.5, 0.05);
  EXPECT_NEAR(sum[1][1] / 10000, 0.5, 0.05);
}

TEST(Synth, GeometrySharedAcrossSampleSeeds) {
  auto a = Options(SynthKind::kBlobsMulticlass, 5000, 1);
  auto b = Options(SynthKind::kBlobsMulticlass, 5000, 2);
  a.classes = b.classes = 3;
  a.cluster_std = b.cluster_std = 0.1;
  const Dataset da = Synthesize(a);
  const Dataset db = Synthesize(b);
  // Class means agree up to sampling error when the geometry seed matches.
  for (Label l = 0; l < 3; ++l) {
    for (int k = 0; k < a.dim; ++k) {
      double ma = 0, mb = 0;
      for (size_t i = l; i < 5000; i += 3) {
        ma += da.instances[i].features[k];
        mb += db.instances[i].features[k];
      }
      EXPECT_NEAR(ma, mb, 0.05 * 1667);
    }
  }
}

TEST(Synth, GlyphPixelsInUnitRange) {
  const Dataset d = Synthesize(Options(SynthKind::kGlyphGrid, 100, 3));
  ASSERT_TRUE(d.feature_shape.has_value());
  EXPECT_EQ(*d.feature_shape, (FeatureShape{12, 12, 1}));
  for (const auto& inst : d.instances) {
    for (const double v : inst.features) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Synth, TokensPlantExactGroupFraction) {
  const Dataset d = Synthesize(Options(SynthKind::kTokensBinary, 1000, 5));
  int tagged = 0;
  int tagged_positive = 0;
  for (const auto& inst : d.instances) {
    double total = 0;
    for (const double v : inst.features) total += v;
    const bool in_group = inst.HasGroup("genre:comedy");
    EXPECT_EQ(total, in_group ? 13.0 : 12.0);
    EXPECT_EQ(inst.features[TokenVocabulary::kGroupMarker], in_group ? 1.0 : 0.0);
    tagged += in_group;
    tagged_positive += in_group && inst.label == 1;
  }
  EXPECT_EQ(tagged, 200);
  EXPECT_EQ(tagged_positive, 100);
}

}  // namespace
}  // namespace bcompat
