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

#include "bcompat/trainer.h"

#include <cmath>
#include <functional>

#include "bcompat/compat.h"
#include "bcompat/error.h"
#include "bcompat/rng.h"
#include "bcompat/synth.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bcompat {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kInvalidArgument;
}

Dataset Blobs(size_t n, double offset, uint64_t seed) {
  SynthOptions o;
  o.kind = SynthKind::kBlobsBinary;
  o.size = n;
  o.seed = seed;
  o.mean_offset = offset;
  return Synthesize(o);
}

// Random dataset with `k` labels 10, 20, ... and `dim` features.
Dataset RandomDataset(Rng& rng, size_t n, int k, size_t dim) {
  Dataset d;
  for (int l = 0; l < k; ++l) d.label_set.push_back(10 * (l + 1));
  for (size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.id = "r" + std::to_string(i);
    inst.label = d.label_set[rng.UniformInt(k)];
    for (size_t j = 0; j < dim; ++j) inst.features.push_back(rng.Normal());
    d.instances.push_back(inst);
  }
  return d;
}

double Accuracy(const PredictionLog& log) {
  size_t right = 0;
  for (const auto& r : log.records) right += r.correct();
  return static_cast<double>(right) / static_cast<double>(log.records.size());
}

// -log p_y from the public probability interface.
double PlainCrossEntropy(const ModelParams& p, const Instance& inst) {
  const auto probs = PredictProba(p, inst.features);
  size_t k = 0;
  while (p.label_set[k] != inst.label) ++k;
  return -std::log(probs[k]);
}

ModelParams HandLinear() {
  ModelParams p;
  p.arch = Arch::kLinear;
  p.label_set = {0, 1};
  p.feature_dim = 2;
  p.layers = {Matrix(2, 2), Matrix(2, 1)};
  p.layers[0].data = {1.0, 0.0, -1.0, 0.0};
  return p;
}

TEST(Predict, HandSetWeights) {
  Dataset d;
  d.label_set = {0, 1};
  d.instances.push_back({"a", {3.0, 0.0}, 0, {"g:x"}});
  const auto log = Predict(HandLinear(), d, "hand");
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].predicted_label, 0);
  // softmax(3, -3)[0] = 1 / (1 + e^-6).
  EXPECT_NEAR(*log.records[0].confidence, 1.0 / (1.0 + std::exp(-6.0)), 1e-15);
  EXPECT_NEAR(*log.records[0].confidence, 0.9975, 1e-4);
  EXPECT_EQ(log.records[0].groups, (std::vector<std::string>{"g:x"}));
}

TEST(Predict, ZeroWeightsGiveUniformConfidenceAndLowestLabel) {
  ModelParams p = HandLinear();
  p.layers[0].data.assign(4, 0.0);
  const auto log = Predict(p, Blobs(50, 0.5, 1), "zero");
  for (const auto& r : log.records) {
    EXPECT_EQ(*r.confidence, 0.5);
    EXPECT_EQ(r.predicted_label, 0);
  }
}

TEST(Predict, LogAlignsWithItself) {
  const Dataset d = Blobs(100, 0.5, 2);
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto params = Train(d, cfg).params;
  const auto log = Predict(params, d, "m");
  ValidateLog(log);
  const auto report = Compare(Align(log, log));
  EXPECT_EQ(report.btc, 1.0);
  EXPECT_EQ(report.bec, 1.0);
  EXPECT_EQ(ParsePredictionLogJsonl(SerializePredictionLog(log), "m").log.records,
            log.records);
}

TEST(Predict, SoftmaxIsADistribution) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.UniformInt(5));
    const Arch arch = trial % 2 ? Arch::kMlp : Arch::kLinear;
    const Dataset d = RandomDataset(rng, 20, k, 4);
    auto p = InitModel(arch, 6, d.label_set, 4, rng.NextU64());
    for (auto& m : p.layers) {
      for (double& v : m.data) v *= 30.0;  // Push logits into saturation.
    }
    for (const auto& inst : d.instances) {
      const auto probs = PredictProba(p, inst.features);
      double sum = 0.0;
      for (const double v : probs) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Predict, ShapeMismatch) {
  Dataset d;
  d.label_set = {0, 1};
  d.instances.push_back({"a", {1.0, 2.0, 3.0}, 0, {}});
  EXPECT_EQ(CodeOf([&] { Predict(HandLinear(), d, "m"); }),
            ErrorCode::kShapeMismatch);
}

TEST(Loss, ZeroLambdaIsMeanCrossEntropy) {
  Rng rng(3);
  const Dataset d = RandomDataset(rng, 30, 3, 5);
  const auto p = InitModel(Arch::kMlp, 7, d.label_set, 5, 11);
  double expected = 0.0;
  for (const auto& inst : d.instances) expected += PlainCrossEntropy(p, inst);
  expected /= 30.0;
  TrainConfig cfg;
  EXPECT_NEAR(Loss(p, d, cfg), expected, 1e-12);
}

TEST(Loss, ReferenceCorrectEverywhereDoublesAtLambdaOne) {
  Rng rng(4);
  const Dataset d = RandomDataset(rng, 25, 4, 3);
  const auto p = InitModel(Arch::kLinear, 0, d.label_set, 3, 12);
  // A reference whose bias dominates predicts every example correctly once
  // the batch holds a single class.
  Dataset one_class = d;
  for (auto& inst : one_class.instances) inst.label = 30;
  ModelParams ref = InitModel(Arch::kLinear, 0, d.label_set, 3, 13);
  ref.layers[1].data = {0.0, 0.0, 1000.0, 0.0};
  TrainConfig plain;
  TrainConfig penalized;
  penalized.lambda_c = 1.0;
  penalized.reference_model = ref;
  EXPECT_NEAR(Loss(p, one_class, penalized), 2.0 * Loss(p, one_class, plain),
              1e-12);
}

TEST(Loss, HandEvaluatedTwoExampleBatch) {
  Dataset batch;
  batch.label_set = {0, 1};
  batch.instances.push_back({"e1", {1.0, 0.5}, 0, {}});
  batch.instances.push_back({"e2", {-0.5, 2.0}, 0, {}});
  ModelParams p = InitModel(Arch::kLinear, 0, {0, 1}, 2, 21);
  // Reference predicts label 0 iff the first feature is positive: correct
  // on e1 only.
  ModelParams ref = HandLinear();
  ASSERT_EQ(Predict(ref, batch, "ref").records[0].predicted_label, 0);
  ASSERT_EQ(Predict(ref, batch, "ref").records[1].predicted_label, 1);
  const double l1 = PlainCrossEntropy(p, batch.instances[0]);
  const double l2 = PlainCrossEntropy(p, batch.instances[1]);
  TrainConfig cfg;
  cfg.lambda_c = 2.0;
  cfg.reference_model = ref;
  EXPECT_NEAR(Loss(p, batch, cfg), (3.0 * l1 + l2) / 2.0, 1e-12);
}

TEST(Loss, MonotoneInLambda) {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = RandomDataset(rng, 1 + rng.UniformInt(12), 3, 2);
    const auto p = InitModel(Arch::kLinear, 0, d.label_set, 2, rng.NextU64());
    const auto ref = InitModel(Arch::kLinear, 0, d.label_set, 2, rng.NextU64());
    bool ref_ever_correct = false;
    for (const auto& r : Predict(ref, d, "ref").records) {
      ref_ever_correct |= r.correct();
    }
    TrainConfig cfg;
    cfg.reference_model = ref;
    double previous = Loss(p, d, cfg);
    for (const double lambda : {0.5, 1.0, 3.0}) {
      cfg.lambda_c = lambda;
      const double current = Loss(p, d, cfg);
      if (ref_ever_correct) {
        EXPECT_GT(current, previous);
      } else {
        EXPECT_EQ(current, previous);
      }
      previous = current;
    }
  }
}

TEST(Loss, Errors) {
  Rng rng(1);
  const Dataset d = RandomDataset(rng, 5, 2, 2);
  const auto p = InitModel(Arch::kLinear, 0, d.label_set, 2, 1);
  TrainConfig cfg;
  cfg.lambda_c = 1.0;
  EXPECT_EQ(CodeOf([&] { Loss(p, d, cfg); }), ErrorCode::kMissingReferenceModel);
  EXPECT_EQ(CodeOf([&] { Loss(p, Dataset{{}, d.label_set, {}}, TrainConfig{}); }),
            ErrorCode::kEmptyDataset);
}

// Central differences against the analytic gradient, including the
// penalty term.
void CheckGradient(Arch arch, uint64_t seed, double lambda) {
  Rng rng(seed);
  const int k = 2 + static_cast<int>(rng.UniformInt(3));
  const size_t dim = 2 + rng.UniformInt(4);
  const Dataset d = RandomDataset(rng, 6, k, dim);
  const auto p = InitModel(arch, 5, d.label_set, dim, rng.NextU64());
  TrainConfig cfg;
  cfg.lambda_c = lambda;
  cfg.reference_model = InitModel(arch, 5, d.label_set, dim, rng.NextU64());
  const auto analytic = ComputeLossGradient(p, d, cfg);
  EXPECT_NEAR(analytic.loss, Loss(p, d, cfg), 1e-12);
  const double h = 1e-6;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    for (size_t i = 0; i < p.layers[l].data.size(); ++i) {
      ModelParams plus = p;
      ModelParams minus = p;
      plus.layers[l].data[i] += h;
      minus.layers[l].data[i] -= h;
      const double numeric = (Loss(plus, d, cfg) - Loss(minus, d, cfg)) / (2 * h);
      const double a = analytic.grads[l].data[i];
      const double rel = std::abs(a - numeric) /
                         std::max(1e-7, std::abs(a) + std::abs(numeric));
      EXPECT_LT(rel, 1e-4) << "layer " << l << " entry " << i << " analytic "
                           << a << " numeric " << numeric;
    }
  }
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    for (const double lambda : {0.0, 1.5}) {
      CheckGradient(Arch::kLinear, seed, lambda);
      CheckGradient(Arch::kMlp, seed, lambda);
    }
  }
}

TEST(Train, SeparableBlobsReachHighAccuracy) {
  const Dataset d = Blobs(1000, 2.0, 5);
  // Independent oracle: the Bayes rule sign(x0 + x1) shows the sample
  // supports the target.
  size_t bayes_right = 0;
  for (const auto& inst : d.instances) {
    bayes_right += (inst.features[0] + inst.features[1] > 0) == (inst.label == 1);
  }
  ASSERT_GE(bayes_right, 990u);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 50;
  const auto result = Train(d, cfg);
  EXPECT_GE(Accuracy(Predict(result.params, d, "m")), 0.99);
}

TEST(Train, ZeroEpochWarmStartIsIdentity) {
  const Dataset d = Blobs(40, 0.5, 5);
  const auto m = InitModel(Arch::kMlp, 4, d.label_set, 2, 77);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.warm_start_from = m;
  EXPECT_EQ(Train(d, cfg).params, m);
  cfg.epochs = 1;
  EXPECT_NE(Train(d, cfg).params, m);
}

TEST(Train, SeedDeterminism) {
  const Dataset d = Blobs(300, 0.5, 9);
  for (const Arch arch : {Arch::kLinear, Arch::kMlp}) {
    TrainConfig cfg;
    cfg.arch = arch;
    cfg.hidden_units = 8;
    cfg.epochs = 3;
    cfg.seed = 100;
    const auto a = Train(d, cfg);
    const auto b = Train(d, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(SerializeModel(a.params), SerializeModel(b.params));
    cfg.seed = 101;
    EXPECT_NE(Train(d, cfg).params, a.params);
  }
}

TEST(Train, EvalLogsHaveEpochByExampleShape) {
  const Dataset d = Blobs(100, 0.5, 1);
  const Dataset v = Blobs(30, 0.5, 2);
  TrainConfig cfg;
  cfg.epochs = 4;
  const auto result = Train(d, cfg, {{"val", &v}, {"train", &d}});
  ASSERT_EQ(result.eval_logs.size(), 2u);
  EXPECT_EQ(result.eval_logs[0].dataset_id, "val");
  EXPECT_EQ(result.eval_logs[0].epochs(), 4u);
  EXPECT_EQ(result.eval_logs[0].example_ids.size(), 30u);
  for (const auto& bits : result.eval_logs[1].correct) EXPECT_EQ(bits.size(), 100u);
  // The last epoch matches a fresh prediction with the returned params.
  const auto log = Predict(result.params, v, "m");
  for (size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(result.eval_logs[0].correct.back()[i], log.records[i].correct());
  }
}

TEST(Train, Errors) {
  const Dataset d = Blobs(20, 0.5, 1);
  TrainConfig cfg;
  EXPECT_EQ(CodeOf([&] { Train(Dataset{{}, {0, 1}, {}}, cfg); }),
            ErrorCode::kEmptyDataset);
  TrainConfig warm = cfg;
  warm.warm_start_from = InitModel(Arch::kLinear, 0, {0, 1}, 3, 1);
  EXPECT_EQ(CodeOf([&] { Train(d, warm); }), ErrorCode::kShapeMismatch);
  Dataset bad_eval = d;
  bad_eval.instances[0].features.push_back(0.0);
  EXPECT_EQ(CodeOf([&] { Train(d, cfg, {{"e", &bad_eval}}); }),
            ErrorCode::kShapeMismatch);
  Dataset other_labels = d;
  other_labels.label_set = {0, 1, 2};
  EXPECT_EQ(CodeOf([&] { Train(d, cfg, {{"e", &other_labels}}); }),
            ErrorCode::kLabelSetMismatch);
  TrainConfig penalized = cfg;
  penalized.lambda_c = 0.5;
  EXPECT_EQ(CodeOf([&] { Train(d, penalized); }),
            ErrorCode::kMissingReferenceModel);
}

TEST(ModelIo, RoundTrip) {
  const auto dir = testing::TempDir("trainer_test");
  for (const Arch arch : {Arch::kLinear, Arch::kMlp}) {
    const auto p = InitModel(arch, 3, {2, 5, 9}, 4, 6);
    const std::string path = dir + "/" + std::string(ArchName(arch)) + ".json";
    SaveModel(path, p);
    EXPECT_EQ(LoadModel(path), p);
  }
  EXPECT_EQ(CodeOf([] { ParseModel("{\"arch\": \"linear\"}", "m"); }),
            ErrorCode::kParseError);
  auto p = InitModel(Arch::kLinear, 0, {0, 1}, 2, 1);
  p.layers[0].cols = 3;
  EXPECT_EQ(CodeOf([&] { ValidateModel(p); }), ErrorCode::kShapeMismatch);
}

TEST(EpochEvalLogIo, RoundTripAndHeaderless) {
  EpochEvalLog log;
  log.dataset_id = "val";
  log.example_ids = {"a", "b", "c"};
  log.correct = {{true, false, false}, {false, true, false}};
  EXPECT_EQ(ParseEpochEvalLog(SerializeEpochEvalLog(log), "l"), log);

  const auto bare = ParseEpochEvalLog(
      "{\"epoch\": 1, \"correct_ids\": [\"b\"]}\n"
      "{\"epoch\": 2, \"correct_ids\": [\"a\", \"b\"]}\n",
      "l");
  EXPECT_EQ(bare.example_ids, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(bare.correct,
            (std::vector<std::vector<bool>>{{true, false}, {true, true}}));

  EXPECT_THROW(ParseEpochEvalLog("{\"epoch\": 2, \"correct_ids\": []}\n", "l"),
               ParseError);
  EXPECT_THROW(
      ParseEpochEvalLog("{\"example_ids\": [\"a\"]}\n"
                        "{\"epoch\": 1, \"correct_ids\": [\"z\"]}\n",
                        "l"),
      Error);
}

}  // namespace
}  // namespace bcompat
