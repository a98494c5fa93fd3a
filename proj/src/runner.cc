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

#include "bcompat/runner.h"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "bcompat/compat.h"
#include "bcompat/dataset.h"
#include "bcompat/error.h"
#include "bcompat/experiments.h"
#include "bcompat/forgetting.h"
#include "bcompat/manifest.h"
#include "bcompat/noise.h"
#include "bcompat/pipeline.h"
#include "bcompat/prediction_log.h"
#include "bcompat/report_io.h"
#include "bcompat/synth.h"
#include "bcompat/text_io.h"
#include "bcompat/trainer.h"
#include "json.hpp"

namespace bcompat {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

[[noreturn]] void ConfigFail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kConfigError, field + ": " + msg);
}

// A JSON node plus its dotted path, for error messages.
class Field {
 public:
  Field(const Json* node, std::string path)
      : node_(node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& json() const { return *node_; }

  std::string Child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool Has(const std::string& key) const {
    return node_->is_object() && node_->contains(key);
  }

  Field At(const std::string& key) const {
    RequireObject();
    auto it = node_->find(key);
    if (it == node_->end()) ConfigFail(Child(key), "required");
    return Field(&*it, Child(key));
  }

  std::optional<Field> Get(const std::string& key) const {
    RequireObject();
    auto it = node_->find(key);
    if (it == node_->end()) return std::nullopt;
    return Field(&*it, Child(key));
  }

  void AllowKeys(const std::set<std::string>& allowed) const {
    RequireObject();
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!allowed.count(it.key())) ConfigFail(Child(it.key()), "unknown key");
    }
  }

  void RequireObject() const {
    if (!node_->is_object()) ConfigFail(Name(), "must be an object");
  }

  std::string String() const {
    if (!node_->is_string()) ConfigFail(Name(), "must be a string");
    return node_->get<std::string>();
  }

  double Number() const {
    if (!node_->is_number()) ConfigFail(Name(), "must be a number");
    return node_->get<double>();
  }

  long long Int() const {
    if (!node_->is_number_integer()) ConfigFail(Name(), "must be an integer");
    return node_->get<long long>();
  }

  long long IntAtLeast(long long lo) const {
    long long v = Int();
    if (v < lo) ConfigFail(Name(), fmt::format("must be >= {}", lo));
    return v;
  }

  uint64_t Unsigned() const {
    if (!node_->is_number_unsigned()) {
      ConfigFail(Name(), "must be a non-negative integer");
    }
    return node_->get<uint64_t>();
  }

  double Fraction() const {
    double v = Number();
    if (!(v >= 0.0 && v <= 1.0)) ConfigFail(Name(), "must be in [0, 1]");
    return v;
  }

  bool Bool() const {
    if (!node_->is_boolean()) ConfigFail(Name(), "must be a boolean");
    return node_->get<bool>();
  }

  std::vector<double> Numbers() const {
    if (!node_->is_array() || node_->empty()) {
      ConfigFail(Name(), "must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : *node_) {
      if (!v.is_number()) ConfigFail(Name(), "must contain only numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  std::string Name() const { return path_.empty() ? "config" : path_; }

  const Json* node_;
  std::string path_;
};

SynthOptions ParseSynthOptions(const Field& f) {
  f.AllowKeys({"kind", "size", "seed", "geometry_seed", "id_prefix",
               "mean_offset", "classes", "dim", "center_scale", "cluster_std",
               "pixel_noise", "group_fraction", "group_tag"});
  SynthOptions o;
  Field kind = f.At("kind");
  try {
    o.kind = ParseSynthKind(kind.String());
  } catch (const Error& e) {
    ConfigFail(kind.path(), e.message());
  }
  if (auto v = f.Get("size")) o.size = static_cast<size_t>(v->IntAtLeast(1));
  if (auto v = f.Get("seed")) o.seed = v->Unsigned();
  if (auto v = f.Get("geometry_seed")) o.geometry_seed = v->Unsigned();
  if (auto v = f.Get("id_prefix")) o.id_prefix = v->String();
  if (auto v = f.Get("mean_offset")) o.mean_offset = v->Number();
  if (auto v = f.Get("classes")) o.classes = static_cast<int>(v->IntAtLeast(2));
  if (auto v = f.Get("dim")) o.dim = static_cast<int>(v->IntAtLeast(1));
  if (auto v = f.Get("center_scale")) o.center_scale = v->Number();
  if (auto v = f.Get("cluster_std")) o.cluster_std = v->Number();
  if (auto v = f.Get("pixel_noise")) o.pixel_noise = v->Number();
  if (auto v = f.Get("group_fraction")) o.group_fraction = v->Fraction();
  if (auto v = f.Get("group_tag")) o.group_tag = v->String();
  return o;
}

TrainConfig ParseTrainer(const std::optional<Field>& f) {
  TrainConfig cfg;
  if (!f) return cfg;
  f->AllowKeys({"arch", "hidden_units", "learning_rate", "epochs",
                "batch_size", "shuffle_each_epoch"});
  if (auto v = f->Get("arch")) {
    try {
      cfg.arch = ParseArch(v->String());
    } catch (const Error& e) {
      ConfigFail(v->path(), e.message());
    }
  }
  if (auto v = f->Get("hidden_units")) {
    cfg.hidden_units = static_cast<int>(v->IntAtLeast(1));
  }
  if (auto v = f->Get("learning_rate")) {
    cfg.learning_rate = v->Number();
    if (!(cfg.learning_rate > 0.0)) ConfigFail(v->path(), "must be positive");
  }
  if (auto v = f->Get("epochs")) cfg.epochs = static_cast<int>(v->IntAtLeast(0));
  if (auto v = f->Get("batch_size")) {
    cfg.batch_size = static_cast<int>(v->IntAtLeast(1));
  }
  if (auto v = f->Get("shuffle_each_epoch")) cfg.shuffle_each_epoch = v->Bool();
  return cfg;
}

NoiseSpec ParseNoise(const Field& f) {
  f.AllowKeys({"kind", "rate", "label_a", "label_b", "target_label",
               "area_fraction", "fill_value", "outlier_label", "group_tag"});
  NoiseSpec spec;
  Field kind = f.At("kind");
  try {
    spec.kind = ParseNoiseKind(kind.String());
  } catch (const Error& e) {
    ConfigFail(kind.path(), e.message());
  }
  if (auto v = f.Get("rate")) spec.rate = v->Fraction();
  auto label = [&](const char* key, Label& out) {
    if (auto v = f.Get(key)) out = static_cast<Label>(v->Int());
  };
  label("label_a", spec.label_a);
  label("label_b", spec.label_b);
  label("target_label", spec.target_label);
  label("outlier_label", spec.outlier_label);
  if (auto v = f.Get("area_fraction")) spec.area_fraction = v->Fraction();
  if (auto v = f.Get("fill_value")) spec.fill_value = v->Number();
  if (auto v = f.Get("group_tag")) spec.group_tag = v->String();
  switch (spec.kind) {
    case NoiseKind::kLabelSwap:
      f.At("label_a");
      f.At("label_b");
      if (spec.label_a == spec.label_b) {
        ConfigFail(f.Child("label_b"), "must differ from label_a");
      }
      break;
    case NoiseKind::kFeatureOcclusion:
      f.At("target_label");
      break;
    case NoiseKind::kOutlierMerge:
      f.At("target_label");
      f.At("outlier_label");
      if (spec.target_label == spec.outlier_label) {
        ConfigFail(f.Child("outlier_label"), "must differ from target_label");
      }
      break;
    case NoiseKind::kGroupFlip:
      if (f.At("group_tag").String().empty()) {
        ConfigFail(f.Child("group_tag"), "must not be empty");
      }
      break;
  }
  return spec;
}

std::vector<double> StrictlyIncreasing(const Field& f) {
  std::vector<double> v = f.Numbers();
  for (size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) ConfigFail(f.path(), "must be strictly increasing");
  }
  return v;
}

// Resolves and caches the named datasets of a config.
class DatasetRegistry {
 public:
  DatasetRegistry(const Field& datasets, fs::path base, RunManifest* manifest)
      : datasets_(datasets), base_(std::move(base)), manifest_(manifest) {}

  const Dataset& Get(const std::string& name) {
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    if (!datasets_.Has(name)) ConfigFail(datasets_.Child(name), "required");
    if (!resolving_.insert(name).second) {
      ConfigFail(datasets_.Child(name), "circular subset_of reference");
    }
    Dataset d = Resolve(datasets_.At(name));
    resolving_.erase(name);
    return cache_.emplace(name, std::move(d)).first->second;
  }

 private:
  Dataset Resolve(const Field& f) {
    f.RequireObject();
    if (f.Has("path")) {
      f.AllowKeys({"path"});
      std::string path = ResolvePath(base_, f.At("path").String());
      manifest_->AddInput(path);
      return LoadDataset(path);
    }
    if (f.Has("synth")) {
      f.AllowKeys({"synth"});
      return Synthesize(ParseSynthOptions(f.At("synth")));
    }
    if (f.Has("subset_of")) {
      f.AllowKeys({"subset_of", "per_class"});
      const Dataset& parent = Get(f.At("subset_of").String());
      return TakePerClass(parent,
                          static_cast<size_t>(f.At("per_class").IntAtLeast(1)));
    }
    ConfigFail(f.path(), "needs one of path, synth or subset_of");
  }

 public:
  static std::string ResolvePath(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal().string();
  }

 private:
  Field datasets_;
  fs::path base_;
  RunManifest* manifest_;
  std::map<std::string, Dataset> cache_;
  std::set<std::string> resolving_;
};

// Writes files under the output directory and lists them in the manifest.
class OutputWriter {
 public:
  OutputWriter(fs::path dir, RunManifest* manifest)
      : dir_(std::move(dir)), manifest_(manifest) {}

  void Write(const std::string& relative, std::string_view contents) {
    fs::path path = dir_ / relative;
    fs::create_directories(path.parent_path());
    WriteFile(path.string(), contents);
    manifest_->outputs.push_back(relative);
  }

 private:
  fs::path dir_;
  RunManifest* manifest_;
};

std::string Curve(const std::string& x_name, const std::string& y_name,
                  const std::vector<double>& x, const std::vector<double>& y) {
  std::string out = x_name + "," + y_name + "\n";
  for (size_t i = 0; i < x.size(); ++i) {
    out += FormatDouble(x[i]) + "," + FormatDouble(y[i]) + "\n";
  }
  return out;
}

std::string MeanStdCells(const MeanStd& m) {
  return FormatDouble(m.mean) + "," + FormatDouble(m.std);
}

Json MeanStdJson(const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}}; }

Json AggregateJson(const BaselineAggregate& a) {
  Json j;
  j["acc_h1"] = MeanStdJson(a.acc_h1);
  j["acc_h2"] = MeanStdJson(a.acc_h2);
  j["btc"] = MeanStdJson(a.btc);
  j["bec"] = MeanStdJson(a.bec);
  return j;
}

std::string TrialFileName(size_t trial) {
  return fmt::format("trials/trial_{:03d}.json", trial);
}

struct Context {
  Field root;
  fs::path base;
  RunManifest* manifest;
  OutputWriter* out;
  DatasetRegistry* data;
  RunOptions options;
  Json* resolved;
};

std::string RunBaseline(Context& ctx, const std::string& experiment) {
  const Dataset& train = ctx.data->Get("train");
  const Dataset& test = ctx.data->Get("test");
  if (ctx.root.Has("datasets") && ctx.root.At("datasets").Has("validation")) {
    ctx.options.validation = &ctx.data->Get("validation");
  }
  TrainConfig cfg = ParseTrainer(ctx.root.Get("trainer"));
  size_t trials = ctx.root.Has("trials")
                      ? static_cast<size_t>(ctx.root.At("trials").IntAtLeast(2))
                      : 25;
  (*ctx.resolved)["trials"] = trials;

  BaselineResult result =
      StochasticityBaseline(train, test, cfg, trials, ctx.options);
  for (const auto& t : result.trials) {
    ctx.out->Write(TrialFileName(t.trial_index), TrialJson(t));
  }
  const BaselineAggregate& a = result.aggregate;
  ctx.out->Write("aggregate.csv",
                 "trials,acc_h1_mean,acc_h1_std,acc_h2_mean,acc_h2_std,"
                 "btc_mean,btc_std,bec_mean,bec_std\n" +
                     fmt::format("{},{},{},{},{}\n", trials,
                                 MeanStdCells(a.acc_h1), MeanStdCells(a.acc_h2),
                                 MeanStdCells(a.btc), MeanStdCells(a.bec)));

  std::vector<size_t> u = SaturationCurve(result.trials);
  std::vector<double> k, uk;
  for (size_t i = 0; i < u.size(); ++i) {
    k.push_back(static_cast<double>(i + 1));
    uk.push_back(static_cast<double>(u[i]));
  }
  ctx.out->Write("curves/saturation.csv", Curve("trials", "unique_incompatible", k, uk));

  std::vector<double> idx, btc, bec;
  for (const auto& t : result.trials) {
    idx.push_back(static_cast<double>(t.trial_index));
    btc.push_back(t.report.btc);
    bec.push_back(t.report.bec);
  }
  ctx.out->Write("curves/btc.csv", Curve("trial", "btc", idx, btc));
  ctx.out->Write("curves/bec.csv", Curve("trial", "bec", idx, bec));

  if (ctx.options.validation != nullptr) {
    ctx.out->Write("forgetting.csv",
                   ForgettingTableCsv(AverageForgetting(result.trials)));
  }

  Json summary;
  summary["experiment"] = experiment;
  summary["trials"] = trials;
  summary["aggregate"] = AggregateJson(a);
  summary["unique_incompatible"] = u.empty() ? 0 : u.back();
  ctx.out->Write("summary.json", summary.dump(2) + "\n");

  return fmt::format("BTC={} BEC={} trials={} unique_incompatible={}",
                     FormatFixed4(a.btc.mean), FormatFixed4(a.bec.mean), trials,
                     u.empty() ? 0 : u.back());
}

std::string RunSweep(Context& ctx, bool lambda_axis) {
  std::vector<double> axis_values;
  if (lambda_axis) {
    axis_values = StrictlyIncreasing(ctx.root.At("lambdas"));
    if (axis_values.front() != 0.0) ConfigFail("lambdas", "must start at 0");
  } else {
    axis_values = StrictlyIncreasing(ctx.root.At("rates"));
    for (double r : axis_values) {
      if (r < 0.0 || r > 1.0) ConfigFail("rates", "must lie in [0, 1]");
    }
  }
  NoiseSpec noise = ParseNoise(ctx.root.At("noise"));
  if (lambda_axis && !ctx.root.At("noise").Has("rate")) {
    ConfigFail("noise.rate", "required");
  }
  TrainConfig cfg = ParseTrainer(ctx.root.Get("trainer"));
  size_t trials = ctx.root.Has("trials")
                      ? static_cast<size_t>(ctx.root.At("trials").IntAtLeast(1))
                      : 5;
  (*ctx.resolved)["trials"] = trials;
  const Dataset& big = ctx.data->Get("big");
  const Dataset& small = ctx.data->Get("small");
  const Dataset& test = ctx.data->Get("test");

  SweepResult result =
      lambda_axis ? LambdaSweep(small, big, test, noise, axis_values, cfg,
                                trials, ctx.options)
                  : NoiseSweep(small, big, test, noise, axis_values, cfg,
                               trials, ctx.options);
  const std::string& axis = result.axis_name;

  std::map<double, size_t> cell_of;
  for (size_t c = 0; c < result.cells.size(); ++c) {
    cell_of[result.cells[c].axis_value] = c;
  }
  for (const auto& t : result.trials) {
    size_t c = cell_of.at(*t.axis_value);
    ctx.out->Write(fmt::format("trials/cell_{:02d}_trial_{:03d}.json", c,
                               t.trial_index),
                   TrialJson(t));
  }

  std::string agg = axis +
                    ",trials,btc_mean,btc_std,bec_mean,bec_std,acc_h1_mean,"
                    "acc_h1_std,acc_h2_mean,acc_h2_std,gain_mean,gain_std,"
                    "subgroup_acc_h1_mean,subgroup_acc_h1_std,"
                    "subgroup_acc_h2_mean,subgroup_acc_h2_std\n";
  auto optional_cells = [](const std::optional<MeanStd>& m) {
    return m ? MeanStdCells(*m) : std::string(",");
  };
  std::string groups = axis + ",grouping,group,gain_mean,gain_std\n";
  std::vector<double> x, btc, bec, gain, acc_h2, sub_h2;
  bool have_subgroup = true;
  for (const auto& c : result.cells) {
    agg += fmt::format("{},{},{},{},{},{},{},{},{}\n", FormatDouble(c.axis_value),
                       c.trials, MeanStdCells(c.btc), MeanStdCells(c.bec),
                       MeanStdCells(c.acc_h1), MeanStdCells(c.acc_h2),
                       MeanStdCells(c.accuracy_gain),
                       optional_cells(c.subgroup_acc_h1),
                       optional_cells(c.subgroup_acc_h2));
    for (const auto& [g, m] : c.label_group_gain) {
      groups += fmt::format("{},label,{},{}\n", FormatDouble(c.axis_value),
                            CsvField(g), MeanStdCells(m));
    }
    for (const auto& [g, m] : c.tag_group_gain) {
      groups += fmt::format("{},tag,{},{}\n", FormatDouble(c.axis_value),
                            CsvField(g), MeanStdCells(m));
    }
    x.push_back(c.axis_value);
    btc.push_back(c.btc.mean);
    bec.push_back(c.bec.mean);
    gain.push_back(c.accuracy_gain.mean);
    acc_h2.push_back(c.acc_h2.mean);
    if (c.subgroup_acc_h2) {
      sub_h2.push_back(c.subgroup_acc_h2->mean);
    } else {
      have_subgroup = false;
    }
  }
  ctx.out->Write("aggregate.csv", agg);
  ctx.out->Write("groups.csv", groups);
  ctx.out->Write("curves/btc.csv", Curve(axis, "btc", x, btc));
  ctx.out->Write("curves/bec.csv", Curve(axis, "bec", x, bec));
  ctx.out->Write("curves/accuracy_gain.csv", Curve(axis, "accuracy_gain", x, gain));
  ctx.out->Write("curves/acc_h2.csv", Curve(axis, "acc_h2", x, acc_h2));
  if (have_subgroup && !sub_h2.empty()) {
    ctx.out->Write("curves/subgroup_acc_h2.csv",
                   Curve(axis, "subgroup_acc_h2", x, sub_h2));
  }

  Json summary;
  summary["experiment"] = lambda_axis ? "lambda-sweep" : "noise-sweep";
  summary["axis"] = axis;
  summary["trials_per_cell"] = trials;
  summary["h1_shared_across_axis"] = true;
  summary["note"] =
      "h1 is trained once per trial on the clean small set and shared by "
      "every axis value of that trial";
  summary["no_update_baseline"] = AggregateJson(result.baseline);
  summary["btc_slope"] = LeastSquaresSlope(x, btc);
  summary["bec_slope"] = LeastSquaresSlope(x, bec);
  ctx.out->Write("summary.json", summary.dump(2) + "\n");

  return fmt::format("axis={} cells={} trials={} btc_slope={} bec_slope={}", axis,
                     result.cells.size(), trials,
                     FormatFixed4(LeastSquaresSlope(x, btc)),
                     FormatFixed4(LeastSquaresSlope(x, bec)));
}

PredictionLog LoadLogInput(Context& ctx, const Field& f) {
  std::string path = DatasetRegistry::ResolvePath(ctx.base, f.String());
  ctx.manifest->AddInput(path);
  return LoadPredictionLog(path).log;
}

std::string RunPipeline(Context& ctx) {
  Field logs = ctx.root.At("logs");
  logs.AllowKeys({"h1", "h2"});
  PredictionLog h1 = LoadLogInput(ctx, logs.At("h1"));
  PredictionLog h2 = LoadLogInput(ctx, logs.At("h2"));
  std::string charmap_path =
      DatasetRegistry::ResolvePath(ctx.base, ctx.root.At("charmap").String());
  ctx.manifest->AddInput(charmap_path);
  Charmap charmap = LoadCharmap(charmap_path);
  std::string blacklist_path =
      DatasetRegistry::ResolvePath(ctx.base, ctx.root.At("blacklist").String());
  ctx.manifest->AddInput(blacklist_path);
  std::vector<std::string> words = ParseBlacklist(ReadFile(blacklist_path));

  CharAccuracyTable t1 = CharAccuracyFromLog(h1, charmap);
  CharAccuracyTable t2 = CharAccuracyFromLog(h2, charmap);
  std::vector<BlacklistRow> rows = BlacklistReport(words, t1, t2);
  ctx.out->Write("char_accuracy_h1.csv", SerializeCharAccuracyCsv(t1));
  ctx.out->Write("char_accuracy_h2.csv", SerializeCharAccuracyCsv(t2));
  ctx.out->Write("blacklist_report.csv", BlacklistReportCsv(rows));
  size_t worse = 0;
  for (const auto& r : rows) worse += r.delta > 0.0 ? 1 : 0;
  return fmt::format("words={} more_error_prone={}", rows.size(), worse);
}

std::string RunForgettingFiles(Context& ctx) {
  Field logs = ctx.root.At("logs");
  logs.AllowKeys({"h1", "h2"});
  Field eval_logs = ctx.root.At("eval_logs");
  eval_logs.AllowKeys({"h1", "h2"});
  bool allow_partial = false;
  if (auto v = ctx.root.Get("allow_partial")) allow_partial = v->Bool();
  PredictionLog h1 = LoadLogInput(ctx, logs.At("h1"));
  PredictionLog h2 = LoadLogInput(ctx, logs.At("h2"));
  auto load_eval = [&](const Field& f) {
    std::string path = DatasetRegistry::ResolvePath(ctx.base, f.String());
    ctx.manifest->AddInput(path);
    return LoadEpochEvalLog(path);
  };
  EpochEvalLog e1 = load_eval(eval_logs.At("h1"));
  EpochEvalLog e2 = load_eval(eval_logs.At("h2"));
  UpdateComparison cmp = Align(std::move(h1), std::move(h2), allow_partial);
  ForgettingTable table =
      ForgettingByQuadrant(cmp, CountForgettingEvents(e1), CountForgettingEvents(e2));
  ctx.out->Write("forgetting.csv", ForgettingTableCsv(table));
  CompatibilityReport report = Compare(cmp);
  ctx.out->Write("report.json", ReportJson(cmp, report));
  return SummaryLine(report);
}

const std::set<std::string> kTopLevelKeys = {
    "experiment", "seed",  "workers",  "output_dir",    "datasets",
    "trainer",    "noise", "rates",    "lambdas",       "trials",
    "group_tag_namespace", "logs",     "eval_logs",     "charmap",
    "blacklist",  "allow_partial"};

}  // namespace

int DefaultWorkers() {
  const char* env = std::getenv("BCOMPAT_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    long long n = ParseInt(env);
    if (n < 1) throw Error(ErrorCode::kConfigError, "");
    return static_cast<int>(n);
  } catch (const Error&) {
    throw Error(ErrorCode::kConfigError,
                fmt::format("BCOMPAT_WORKERS: must be a positive integer, got "
                            "'{}'",
                            env));
  }
}

RunOutcome RunConfigFile(const std::string& config_path,
                         const RunOverrides& overrides) {
  std::string text = ReadFile(config_path);
  Json config;
  try {
    config = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigError,
                fmt::format("{}: invalid JSON: {}", config_path, e.what()));
  }
  Field root(&config, "");
  root.RequireObject();
  root.AllowKeys(kTopLevelKeys);

  static const std::set<std::string> kExperiments = {
      "baseline", "saturation", "noise-sweep", "lambda-sweep", "forgetting",
      "pipeline"};
  std::string experiment = root.At("experiment").String();
  if (!kExperiments.count(experiment)) {
    ConfigFail("experiment", fmt::format("unknown experiment '{}'", experiment));
  }

  RunOptions options;
  if (auto v = root.Get("seed")) options.root_seed = v->Unsigned();
  if (overrides.workers) {
    if (*overrides.workers < 1) ConfigFail("workers", "must be >= 1");
    options.workers = *overrides.workers;
  } else if (auto v = root.Get("workers")) {
    options.workers = static_cast<int>(v->IntAtLeast(1));
  } else {
    options.workers = DefaultWorkers();
  }
  if (auto v = root.Get("group_tag_namespace")) options.tag_namespace = v->String();

  std::string output_dir;
  if (overrides.output_dir) {
    output_dir = *overrides.output_dir;
  } else {
    output_dir = root.At("output_dir").String();
  }
  if (output_dir.empty()) ConfigFail("output_dir", "must not be empty");

  // The resolved config omits the worker count and output location, which
  // never change results.
  Json resolved = config;
  resolved.erase("workers");
  resolved.erase("output_dir");
  resolved["experiment"] = experiment;
  resolved["seed"] = options.root_seed;

  RunManifest manifest;
  manifest.command = "run";
  fs::path out_dir(output_dir);
  fs::create_directories(out_dir);
  std::string manifest_path = (out_dir / "manifest.json").string();
  manifest.config_json = resolved.dump();
  SaveManifest(manifest_path, manifest);

  fs::path base = fs::path(config_path).parent_path();
  Json empty_datasets = Json::object();
  Field datasets = root.Has("datasets") ? root.At("datasets")
                                        : Field(&empty_datasets, "datasets");
  DatasetRegistry registry(datasets, base, &manifest);
  OutputWriter writer(out_dir, &manifest);
  Context ctx{root, base, &manifest, &writer, &registry, options, &resolved};

  RunOutcome outcome;
  outcome.experiment = experiment;
  outcome.output_dir = output_dir;
  try {
    if (experiment == "baseline" || experiment == "saturation") {
      outcome.summary = RunBaseline(ctx, experiment);
    } else if (experiment == "noise-sweep") {
      outcome.summary = RunSweep(ctx, false);
    } else if (experiment == "lambda-sweep") {
      outcome.summary = RunSweep(ctx, true);
    } else if (experiment == "pipeline") {
      outcome.summary = RunPipeline(ctx);
    } else {
      outcome.summary = RunForgettingFiles(ctx);
    }
  } catch (const std::exception& e) {
    manifest.status = "failed";
    manifest.error = e.what();
    manifest.config_json = resolved.dump();
    SaveManifest(manifest_path, manifest);
    throw;
  }
  manifest.status = "complete";
  manifest.config_json = resolved.dump();
  SaveManifest(manifest_path, manifest);
  return outcome;
}

}  // namespace bcompat
