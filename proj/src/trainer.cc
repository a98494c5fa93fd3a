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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "bcompat/error.h"
#include "bcompat/rng.h"
#include "bcompat/text_io.h"
#include "json.hpp"

namespace bcompat {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr uint64_t kInitRole = 0x494e'4954;
constexpr uint64_t kShuffleRole = 0x5348'5546;

[[noreturn]] void ShapeError(const std::string& msg) {
  throw Error(ErrorCode::kShapeMismatch, msg);
}

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<double> pre;     // Hidden pre-activations (kMlp).
  std::vector<double> hidden;  // Hidden activations (kMlp).
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> dlogits;
  std::vector<double> dhidden;
};

// out = W x + b.
void Affine(const Matrix& w, const Matrix& b, const double* x,
            std::vector<double>& out) {
  out.resize(w.rows);
  for (size_t r = 0; r < w.rows; ++r) {
    const double* row = &w.data[r * w.cols];
    double s = b.data[r];
    for (size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

void Forward(const ModelParams& p, const double* x, Workspace& ws) {
  if (p.arch == Arch::kLinear) {
    Affine(p.layers[0], p.layers[1], x, ws.logits);
  } else {
    Affine(p.layers[0], p.layers[1], x, ws.pre);
    ws.hidden.resize(ws.pre.size());
    for (size_t i = 0; i < ws.pre.size(); ++i) {
      ws.hidden[i] = ws.pre[i] > 0.0 ? ws.pre[i] : 0.0;
    }
    Affine(p.layers[2], p.layers[3], ws.hidden.data(), ws.logits);
  }
  const double m = *std::max_element(ws.logits.begin(), ws.logits.end());
  ws.probs.resize(ws.logits.size());
  double z = 0.0;
  for (size_t k = 0; k < ws.logits.size(); ++k) {
    ws.probs[k] = std::exp(ws.logits[k] - m);
    z += ws.probs[k];
  }
  for (double& v : ws.probs) v /= z;
}

// Cross-entropy of the last Forward() for class index `cls`.
double CrossEntropy(const Workspace& ws, size_t cls) {
  const double m = *std::max_element(ws.logits.begin(), ws.logits.end());
  double z = 0.0;
  for (const double l : ws.logits) z += std::exp(l - m);
  return m + std::log(z) - ws.logits[cls];
}

size_t Argmax(const std::vector<double>& v) {
  return static_cast<size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// grad(W) += g x^T, grad(b) += g.
void AccumulateAffine(const std::vector<double>& g, const double* x,
                      Matrix& gw, Matrix& gb) {
  for (size_t r = 0; r < gw.rows; ++r) {
    if (g[r] == 0.0) continue;
    double* row = &gw.data[r * gw.cols];
    for (size_t c = 0; c < gw.cols; ++c) row[c] += g[r] * x[c];
    gb.data[r] += g[r];
  }
}

// Adds weight * d CE / d params for the last Forward() to `grads`.
void Backward(const ModelParams& p, const double* x, size_t cls, double weight,
              Workspace& ws, std::vector<Matrix>& grads) {
  ws.dlogits.resize(ws.probs.size());
  for (size_t k = 0; k < ws.probs.size(); ++k) {
    ws.dlogits[k] = weight * (ws.probs[k] - (k == cls ? 1.0 : 0.0));
  }
  if (p.arch == Arch::kLinear) {
    AccumulateAffine(ws.dlogits, x, grads[0], grads[1]);
    return;
  }
  AccumulateAffine(ws.dlogits, ws.hidden.data(), grads[2], grads[3]);
  const Matrix& w2 = p.layers[2];
  ws.dhidden.assign(w2.cols, 0.0);
  for (size_t r = 0; r < w2.rows; ++r) {
    const double* row = &w2.data[r * w2.cols];
    for (size_t c = 0; c < w2.cols; ++c) ws.dhidden[c] += row[c] * ws.dlogits[r];
  }
  for (size_t i = 0; i < ws.dhidden.size(); ++i) {
    if (ws.pre[i] <= 0.0) ws.dhidden[i] = 0.0;
  }
  AccumulateAffine(ws.dhidden, x, grads[0], grads[1]);
}

std::vector<Matrix> ZeroGrads(const ModelParams& p) {
  std::vector<Matrix> grads;
  for (const auto& m : p.layers) grads.emplace_back(m.rows, m.cols);
  return grads;
}

// Class index of every instance's label in `label_set`.
std::vector<size_t> ClassIndices(const std::vector<Label>& label_set,
                                 const Dataset& d) {
  std::unordered_map<Label, size_t> index;
  for (size_t k = 0; k < label_set.size(); ++k) index[label_set[k]] = k;
  std::vector<size_t> out;
  out.reserve(d.size());
  for (const auto& inst : d.instances) {
    const auto it = index.find(inst.label);
    if (it == index.end()) {
      throw Error(ErrorCode::kLabelSetMismatch,
                  "label " + std::to_string(inst.label) + " of '" + inst.id +
                      "' is not in the model's label set");
    }
    out.push_back(it->second);
  }
  return out;
}

void CheckFeatures(const ModelParams& p, const Dataset& d) {
  for (const auto& inst : d.instances) {
    if (inst.features.size() != p.feature_dim) {
      ShapeError("instance '" + inst.id + "' has " +
                 std::to_string(inst.features.size()) +
                 " features, model expects " + std::to_string(p.feature_dim));
    }
  }
}

void CheckCompatible(const ModelParams& a, const ModelParams& b,
                     const std::string& what) {
  if (a.label_set != b.label_set) {
    throw Error(ErrorCode::kLabelSetMismatch,
                what + " has a different label set");
  }
  if (a.feature_dim != b.feature_dim) {
    ShapeError(what + " has feature_dim " + std::to_string(b.feature_dim) +
               ", expected " + std::to_string(a.feature_dim));
  }
}

// Per-example loss weights 1 + lambda_c * [reference correct].
std::vector<double> ExampleWeights(const ModelParams& params, const Dataset& d,
                                   const TrainConfig& cfg) {
  std::vector<double> weights(d.size(), 1.0);
  if (cfg.lambda_c == 0.0) return weights;
  if (!cfg.reference_model) {
    throw Error(ErrorCode::kMissingReferenceModel,
                "lambda_c > 0 requires a reference model");
  }
  const ModelParams& ref = *cfg.reference_model;
  CheckCompatible(params, ref, "reference model");
  const auto cls = ClassIndices(ref.label_set, d);
  Workspace ws;
  for (size_t i = 0; i < d.size(); ++i) {
    Forward(ref, d.instances[i].features.data(), ws);
    if (Argmax(ws.probs) == cls[i]) weights[i] += cfg.lambda_c;
  }
  return weights;
}

Matrix UniformMatrix(size_t rows, size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : m.data) v = rng.Uniform(-bound, bound);
  return m;
}

Matrix UniformBias(size_t rows, size_t fan_in, Rng& rng) {
  Matrix m(rows, 1);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : m.data) v = rng.Uniform(-bound, bound);
  return m;
}

void CheckConfig(const TrainConfig& cfg) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (!(cfg.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (cfg.epochs < 0) fail("epochs must be non-negative");
  if (cfg.batch_size <= 0) fail("batch_size must be positive");
  if (!(cfg.lambda_c >= 0.0)) fail("lambda_c must be non-negative");
  if (cfg.lambda_c > 0.0 && !cfg.reference_model) {
    throw Error(ErrorCode::kMissingReferenceModel,
                "lambda_c > 0 requires a reference model");
  }
}

}  // namespace

std::string_view ArchName(Arch arch) {
  return arch == Arch::kLinear ? "linear" : "mlp";
}

Arch ParseArch(std::string_view name) {
  if (name == "linear") return Arch::kLinear;
  if (name == "mlp") return Arch::kMlp;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown architecture '" + std::string(name) + "'");
}

void ValidateModel(const ModelParams& p) {
  if (p.label_set.empty()) ShapeError("model label_set is empty");
  if (std::set<Label>(p.label_set.begin(), p.label_set.end()).size() !=
      p.label_set.size()) {
    ShapeError("model label_set has duplicates");
  }
  if (p.feature_dim == 0) ShapeError("model feature_dim must be positive");
  const size_t c = p.num_classes();
  const size_t d = p.feature_dim;
  std::vector<std::pair<size_t, size_t>> expected;
  if (p.arch == Arch::kLinear) {
    expected = {{c, d}, {c, 1}};
  } else {
    if (p.hidden_units <= 0) ShapeError("mlp needs hidden_units > 0");
    const auto h = static_cast<size_t>(p.hidden_units);
    expected = {{h, d}, {h, 1}, {c, h}, {c, 1}};
  }
  if (p.layers.size() != expected.size()) {
    ShapeError(std::string(ArchName(p.arch)) + " model needs " +
               std::to_string(expected.size()) + " layer matrices, got " +
               std::to_string(p.layers.size()));
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    const Matrix& m = p.layers[i];
    if (m.rows != expected[i].first || m.cols != expected[i].second ||
        m.data.size() != m.rows * m.cols) {
      ShapeError("layer " + std::to_string(i) + " is " +
                 std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                 " with " + std::to_string(m.data.size()) + " values, expected " +
                 std::to_string(expected[i].first) + "x" +
                 std::to_string(expected[i].second));
    }
  }
}

ModelParams InitModel(Arch arch, int hidden_units,
                      const std::vector<Label>& label_set, size_t feature_dim,
                      uint64_t seed) {
  ModelParams p;
  p.arch = arch;
  p.label_set = label_set;
  p.feature_dim = feature_dim;
  Rng rng(seed);
  const size_t c = label_set.size();
  if (arch == Arch::kLinear) {
    p.layers.push_back(UniformMatrix(c, feature_dim, rng));
    p.layers.push_back(UniformBias(c, feature_dim, rng));
  } else {
    if (hidden_units <= 0) ShapeError("mlp needs hidden_units > 0");
    p.hidden_units = hidden_units;
    const auto h = static_cast<size_t>(hidden_units);
    p.layers.push_back(UniformMatrix(h, feature_dim, rng));
    p.layers.push_back(UniformBias(h, feature_dim, rng));
    p.layers.push_back(UniformMatrix(c, h, rng));
    p.layers.push_back(UniformBias(c, h, rng));
  }
  ValidateModel(p);
  return p;
}

std::string SerializeModel(const ModelParams& p) {
  OrderedJson j;
  j["arch"] = ArchName(p.arch);
  j["hidden_units"] = p.hidden_units;
  j["label_set"] = p.label_set;
  j["feature_dim"] = p.feature_dim;
  j["layers"] = OrderedJson::array();
  for (const auto& m : p.layers) {
    OrderedJson layer;
    layer["rows"] = m.rows;
    layer["cols"] = m.cols;
    layer["data"] = m.data;
    j["layers"].push_back(layer);
  }
  return j.dump() + "\n";
}

ModelParams ParseModel(std::string_view text, const std::string& source) {
  ModelParams p;
  try {
    const Json j = Json::parse(text);
    p.arch = ParseArch(j.at("arch").get<std::string>());
    p.hidden_units = j.value("hidden_units", 0);
    p.label_set = j.at("label_set").get<std::vector<Label>>();
    p.feature_dim = j.at("feature_dim").get<size_t>();
    for (const auto& layer : j.at("layers")) {
      Matrix m;
      m.rows = layer.at("rows").get<size_t>();
      m.cols = layer.at("cols").get<size_t>();
      m.data = layer.at("data").get<std::vector<double>>();
      p.layers.push_back(std::move(m));
    }
    ValidateModel(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.message());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.what());
  }
  return p;
}

ModelParams LoadModel(const std::string& path) {
  return ParseModel(ReadFile(path), path);
}

void SaveModel(const std::string& path, const ModelParams& params) {
  WriteFile(path, SerializeModel(params));
}

std::string SerializeEpochEvalLog(const EpochEvalLog& log) {
  OrderedJson header;
  header["dataset_id"] = log.dataset_id;
  header["example_ids"] = log.example_ids;
  std::string out = header.dump() + "\n";
  for (size_t e = 0; e < log.epochs(); ++e) {
    OrderedJson line;
    line["epoch"] = e + 1;
    line["correct_ids"] = OrderedJson::array();
    for (size_t i = 0; i < log.example_ids.size(); ++i) {
      if (log.correct[e][i]) line["correct_ids"].push_back(log.example_ids[i]);
    }
    out += line.dump() + "\n";
  }
  return out;
}

EpochEvalLog ParseEpochEvalLog(std::string_view text,
                               const std::string& source) {
  EpochEvalLog log;
  bool have_header = false;
  std::vector<std::pair<int, std::vector<std::string>>> epochs;
  const auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (Trim(lines[i]).empty()) continue;
    try {
      const Json obj = Json::parse(lines[i]);
      if (!obj.is_object()) {
        throw Error(ErrorCode::kParseError, "expected a JSON object");
      }
      if (obj.contains("example_ids")) {
        if (have_header || !epochs.empty()) {
          throw Error(ErrorCode::kParseError,
                      "header must be the first line and appear once");
        }
        log.dataset_id = obj.value("dataset_id", "");
        log.example_ids = obj["example_ids"].get<std::vector<std::string>>();
        have_header = true;
        continue;
      }
      const int epoch = obj.at("epoch").get<int>();
      if (epoch != static_cast<int>(epochs.size()) + 1) {
        throw Error(ErrorCode::kParseError,
                    "expected epoch " + std::to_string(epochs.size() + 1) +
                        ", got " + std::to_string(epoch));
      }
      epochs.emplace_back(epoch,
                          obj.at("correct_ids").get<std::vector<std::string>>());
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.message());
    } catch (const Json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < log.example_ids.size(); ++i) {
    if (!index.emplace(log.example_ids[i], i).second) {
      throw Error(ErrorCode::kParseError,
                  source + ": duplicate example id '" + log.example_ids[i] + "'");
    }
  }
  if (!have_header) {
    for (const auto& [epoch, ids] : epochs) {
      for (const auto& id : ids) {
        if (index.emplace(id, log.example_ids.size()).second) {
          log.example_ids.push_back(id);
        }
      }
    }
  }
  for (const auto& [epoch, ids] : epochs) {
    std::vector<bool> bits(log.example_ids.size(), false);
    for (const auto& id : ids) {
      const auto it = index.find(id);
      if (it == index.end()) {
        throw Error(ErrorCode::kParseError,
                    source + ": epoch " + std::to_string(epoch) +
                        " names unknown example '" + id + "'");
      }
      bits[it->second] = true;
    }
    log.correct.push_back(std::move(bits));
  }
  return log;
}

EpochEvalLog LoadEpochEvalLog(const std::string& path) {
  return ParseEpochEvalLog(ReadFile(path), path);
}

void SaveEpochEvalLog(const std::string& path, const EpochEvalLog& log) {
  WriteFile(path, SerializeEpochEvalLog(log));
}

LossGradient ComputeLossGradient(const ModelParams& params, const Dataset& batch,
                                 const TrainConfig& cfg) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "batch is empty");
  ValidateModel(params);
  CheckFeatures(params, batch);
  const auto cls = ClassIndices(params.label_set, batch);
  const auto weights = ExampleWeights(params, batch, cfg);
  LossGradient out;
  out.grads = ZeroGrads(params);
  Workspace ws;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const double* x = batch.instances[i].features.data();
    Forward(params, x, ws);
    out.loss += weights[i] * CrossEntropy(ws, cls[i]);
    Backward(params, x, cls[i], weights[i] * inv_n, ws, out.grads);
  }
  out.loss *= inv_n;
  return out;
}

double Loss(const ModelParams& params, const Dataset& batch,
            const TrainConfig& cfg) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "batch is empty");
  ValidateModel(params);
  CheckFeatures(params, batch);
  const auto cls = ClassIndices(params.label_set, batch);
  const auto weights = ExampleWeights(params, batch, cfg);
  Workspace ws;
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    Forward(params, batch.instances[i].features.data(), ws);
    total += weights[i] * CrossEntropy(ws, cls[i]);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> PredictProba(const ModelParams& params,
                                 const std::vector<double>& x) {
  if (x.size() != params.feature_dim) {
    ShapeError("input has " + std::to_string(x.size()) +
               " features, model expects " + std::to_string(params.feature_dim));
  }
  Workspace ws;
  Forward(params, x.data(), ws);
  return ws.probs;
}

PredictionLog Predict(const ModelParams& params, const Dataset& d,
                      const std::string& model_id) {
  ValidateModel(params);
  CheckFeatures(params, d);
  ClassIndices(params.label_set, d);
  PredictionLog log;
  log.model_id = model_id;
  log.label_set = params.label_set;
  log.records.reserve(d.size());
  Workspace ws;
  for (const auto& inst : d.instances) {
    Forward(params, inst.features.data(), ws);
    const size_t k = Argmax(ws.probs);
    PredictionRecord r;
    r.example_id = inst.id;
    r.true_label = inst.label;
    r.predicted_label = params.label_set[k];
    r.confidence = ws.probs[k];
    r.groups = inst.groups;
    log.records.push_back(std::move(r));
  }
  return log;
}

TrainResult Train(const Dataset& d, const TrainConfig& cfg,
                  const std::vector<EvalSet>& eval_sets) {
  if (d.empty()) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  CheckConfig(cfg);
  ModelParams params =
      cfg.warm_start_from
          ? *cfg.warm_start_from
          : InitModel(cfg.arch, cfg.hidden_units, d.label_set, d.feature_dim(),
                      DeriveSeed({cfg.seed, kInitRole}));
  ValidateModel(params);
  if (params.label_set != d.label_set) {
    throw Error(ErrorCode::kLabelSetMismatch,
                "warm-start model and training set have different label sets");
  }
  CheckFeatures(params, d);
  for (const auto& e : eval_sets) {
    if (e.data->label_set != d.label_set) {
      throw Error(ErrorCode::kLabelSetMismatch,
                  "eval set '" + e.id + "' has a different label set");
    }
    CheckFeatures(params, *e.data);
  }
  const auto cls = ClassIndices(params.label_set, d);
  const auto weights = ExampleWeights(params, d, cfg);
  std::vector<std::vector<size_t>> eval_cls;
  TrainResult result;
  for (const auto& e : eval_sets) {
    eval_cls.push_back(ClassIndices(params.label_set, *e.data));
    EpochEvalLog log;
    log.dataset_id = e.id;
    for (const auto& inst : e.data->instances) log.example_ids.push_back(inst.id);
    result.eval_logs.push_back(std::move(log));
  }

  std::vector<size_t> order(d.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng shuffle_rng(DeriveSeed({cfg.seed, kShuffleRole}));
  auto grads = ZeroGrads(params);
  Workspace ws;
  const auto batch_size = static_cast<size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) shuffle_rng.Shuffle(order.begin(), order.end());
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t end = std::min(start + batch_size, order.size());
      for (auto& g : grads) std::fill(g.data.begin(), g.data.end(), 0.0);
      for (size_t j = start; j < end; ++j) {
        const size_t i = order[j];
        const double* x = d.instances[i].features.data();
        Forward(params, x, ws);
        Backward(params, x, cls[i], weights[i], ws, grads);
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      for (size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].data;
        const auto& g = grads[l].data;
        for (size_t k = 0; k < w.size(); ++k) w[k] -= step * g[k];
      }
    }
    for (size_t s = 0; s < eval_sets.size(); ++s) {
      const Dataset& e = *eval_sets[s].data;
      std::vector<bool> bits(e.size());
      for (size_t i = 0; i < e.size(); ++i) {
        Forward(params, e.instances[i].features.data(), ws);
        bits[i] = Argmax(ws.probs) == eval_cls[s][i];
      }
      result.eval_logs[s].correct.push_back(std::move(bits));
    }
  }
  result.params = std::move(params);
  return result;
}

}  // namespace bcompat
