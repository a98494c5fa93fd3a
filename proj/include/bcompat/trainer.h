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

// Small softmax classifiers trained with constant-rate minibatch SGD.
//
// Two architectures are supported: a linear model (multinomial logistic
// regression) and an MLP with one ReLU hidden layer. Training minimizes
//
//   mean over the batch of (1 + lambda_c * [ref(x) == y]) * CE(model(x), y)
//
// where `ref` is a frozen reference model. With lambda_c = 0 this is plain
// cross-entropy. Training is single threaded and a pure function of the
// dataset and the config.

#ifndef BCOMPAT_TRAINER_H_
#define BCOMPAT_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcompat/dataset.h"
#include "bcompat/prediction_log.h"

namespace bcompat {

enum class Arch { kLinear, kMlp };

std::string_view ArchName(Arch arch);
// Accepts "linear" and "mlp".
Arch ParseArch(std::string_view name);

// Dense row-major matrix.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

// Layers are stored as alternating weight (out x in) and bias (out x 1)
// matrices: {W, b} for kLinear and {W1, b1, W2, b2} for kMlp.
struct ModelParams {
  Arch arch = Arch::kLinear;
  int hidden_units = 0;  // kMlp only.
  std::vector<Label> label_set;
  size_t feature_dim = 0;
  std::vector<Matrix> layers;

  size_t num_classes() const { return label_set.size(); }
  bool operator==(const ModelParams&) const = default;
};

// Throws Error(kShapeMismatch) when layer shapes disagree with the
// architecture, feature_dim or label set.
void ValidateModel(const ModelParams& params);

// Cold start: every entry uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ModelParams InitModel(Arch arch, int hidden_units,
                      const std::vector<Label>& label_set, size_t feature_dim,
                      uint64_t seed);

std::string SerializeModel(const ModelParams& params);
ModelParams ParseModel(std::string_view text, const std::string& source);
ModelParams LoadModel(const std::string& path);
void SaveModel(const std::string& path, const ModelParams& params);

struct TrainConfig {
  Arch arch = Arch::kLinear;
  int hidden_units = 16;
  double learning_rate = 0.1;
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 0;
  // When set, training starts from these parameters and `arch` and
  // `hidden_units` are taken from them.
  std::optional<ModelParams> warm_start_from;
  double lambda_c = 0.0;
  std::optional<ModelParams> reference_model;
  bool shuffle_each_epoch = true;
};

// Correctness of a model on every example of an evaluation set, recorded at
// the end of each epoch. correct[e][i] refers to epoch e + 1 and
// example_ids[i].
struct EpochEvalLog {
  std::string dataset_id;
  std::vector<std::string> example_ids;
  std::vector<std::vector<bool>> correct;

  size_t epochs() const { return correct.size(); }
  bool operator==(const EpochEvalLog&) const = default;
};

// JSON Lines: a header {"dataset_id": ..., "example_ids": [...]} followed by
// one {"epoch": k, "correct_ids": [...]} line per epoch, k starting at 1.
// The header is optional on input; without it the example universe is the
// union of all correct ids, in first-seen order.
std::string SerializeEpochEvalLog(const EpochEvalLog& log);
EpochEvalLog ParseEpochEvalLog(std::string_view text, const std::string& source);
EpochEvalLog LoadEpochEvalLog(const std::string& path);
void SaveEpochEvalLog(const std::string& path, const EpochEvalLog& log);

struct EvalSet {
  std::string id;
  const Dataset* data = nullptr;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochEvalLog> eval_logs;  // One per eval set.
};

TrainResult Train(const Dataset& d, const TrainConfig& cfg,
                  const std::vector<EvalSet>& eval_sets = {});

// Penalized loss of `params` on `batch` (see the file comment).
double Loss(const ModelParams& params, const Dataset& batch,
            const TrainConfig& cfg);

// Loss plus its gradient with respect to every layer matrix.
struct LossGradient {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
LossGradient ComputeLossGradient(const ModelParams& params, const Dataset& batch,
                                 const TrainConfig& cfg);

// Softmax class probabilities in label_set order.
std::vector<double> PredictProba(const ModelParams& params,
                                 const std::vector<double>& x);

// Argmax prediction (lowest label index on ties) and max probability as
// confidence. Groups are copied from the dataset.
PredictionLog Predict(const ModelParams& params, const Dataset& d,
                      const std::string& model_id);

}  // namespace bcompat

#endif  // BCOMPAT_TRAINER_H_
