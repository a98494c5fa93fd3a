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

// Command-line front end for the bcompat library.
//
// Exit status: 0 on success, 2 on usage and data errors, 1 otherwise.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "bcompat/compat.h"
#include "bcompat/dataset.h"
#include "bcompat/error.h"
#include "bcompat/forgetting.h"
#include "bcompat/manifest.h"
#include "bcompat/noise.h"
#include "bcompat/pipeline.h"
#include "bcompat/prediction_log.h"
#include "bcompat/report_io.h"
#include "bcompat/runner.h"
#include "bcompat/synth.h"
#include "bcompat/text_io.h"
#include "bcompat/trainer.h"
#include "json.hpp"

namespace bcompat {
namespace {

namespace fs = std::filesystem;

PredictionLog LoadLogReporting(const std::string& path) {
  LogParseResult result = LoadPredictionLog(path);
  for (const auto& w : result.warnings) {
    fmt::print(stderr, "warning: {}: {}\n", path, w);
  }
  return std::move(result.log);
}

// Runs `body` with a manifest that is saved as incomplete first and then as
// complete or failed.
void WithManifest(const std::string& manifest_path, RunManifest manifest,
                  const std::function<void(RunManifest&)>& body) {
  if (fs::path(manifest_path).has_parent_path()) {
    fs::create_directories(fs::path(manifest_path).parent_path());
  }
  SaveManifest(manifest_path, manifest);
  try {
    body(manifest);
  } catch (const std::exception& e) {
    manifest.status = "failed";
    manifest.error = e.what();
    SaveManifest(manifest_path, manifest);
    throw;
  }
  manifest.status = "complete";
  SaveManifest(manifest_path, manifest);
}

struct CompareArgs {
  std::string h1;
  std::string h2;
  bool allow_partial = false;
  std::string group_by = "label";
  size_t hist_bins = 10;
  std::string hist_model = "h2";
  std::string out_dir;
};

void RunCompare(const CompareArgs& a) {
  GroupBy grouping = GroupBy::kTrueLabel;
  std::string tag_namespace;
  if (a.group_by.rfind("tag:", 0) == 0) {
    grouping = GroupBy::kTag;
    tag_namespace = a.group_by.substr(4);
    if (tag_namespace.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--group-by: empty tag namespace");
    }
  } else if (a.group_by != "label") {
    throw Error(ErrorCode::kInvalidArgument,
                "--group-by: expected 'label' or 'tag:<namespace>'");
  }
  WhichModel which = a.hist_model == "h1" ? WhichModel::kH1 : WhichModel::kH2;

  auto analyze = [&](RunManifest* manifest) {
    if (manifest != nullptr) {
      manifest->AddInput(a.h1);
      manifest->AddInput(a.h2);
    }
    UpdateComparison cmp =
        Align(LoadLogReporting(a.h1), LoadLogReporting(a.h2), a.allow_partial);
    CompatibilityReport report = Compare(cmp);
    if (manifest != nullptr) {
      fs::path dir(a.out_dir);
      auto write = [&](const std::string& name, const std::string& contents) {
        WriteFile((dir / name).string(), contents);
        manifest->outputs.push_back(name);
      };
      write("report.json", ReportJson(cmp, report));
      write("groups.csv",
            GroupRowsCsv(GroupBreakdown(cmp, grouping, tag_namespace)));
      write("incompatible.csv", IncompatibleCsv(cmp));
      if (a.hist_bins > 0 && !report.incompatible_ids.empty()) {
        try {
          write("histogram.csv",
                HistogramCsv(IncompatibleConfidenceHistogram(cmp, which,
                                                             a.hist_bins)));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMissingConfidence) throw;
          fmt::print(stderr, "warning: histogram skipped: {}\n", e.message());
        }
      }
    }
    fmt::print("{}\n", SummaryLine(report));
  };

  if (a.out_dir.empty()) {
    analyze(nullptr);
    return;
  }
  RunManifest manifest;
  manifest.command = "compare";
  nlohmann::ordered_json config;
  config["allow_partial"] = a.allow_partial;
  config["group_by"] = a.group_by;
  config["hist_bins"] = a.hist_bins;
  config["hist_model"] = a.hist_model;
  manifest.config_json = config.dump();
  fs::create_directories(a.out_dir);
  WithManifest((fs::path(a.out_dir) / "manifest.json").string(), manifest,
               [&](RunManifest& m) { analyze(&m); });
}

struct SynthArgs {
  SynthOptions options;
  std::string kind = "blobs-binary";
  std::string out;
};

void RunSynth(SynthArgs a) {
  a.options.kind = ParseSynthKind(a.kind);
  RunManifest manifest;
  manifest.command = "synth";
  nlohmann::ordered_json config;
  const SynthOptions& o = a.options;
  config["kind"] = a.kind;
  config["size"] = o.size;
  config["seed"] = o.seed;
  config["geometry_seed"] = o.geometry_seed;
  config["id_prefix"] = o.id_prefix;
  config["mean_offset"] = o.mean_offset;
  config["classes"] = o.classes;
  config["dim"] = o.dim;
  config["center_scale"] = o.center_scale;
  config["cluster_std"] = o.cluster_std;
  config["pixel_noise"] = o.pixel_noise;
  config["group_fraction"] = o.group_fraction;
  config["group_tag"] = o.group_tag;
  manifest.config_json = config.dump();
  WithManifest(a.out + ".manifest.json", manifest, [&](RunManifest& m) {
    Dataset d = Synthesize(a.options);
    SaveDataset(a.out, d);
    m.outputs.push_back(a.out);
    fmt::print("instances={} out={}\n", d.size(), a.out);
  });
}

struct InjectArgs {
  std::string in;
  std::string out;
  std::string kind;
  NoiseSpec spec;
};

void RunInject(InjectArgs a) {
  a.spec.kind = ParseNoiseKind(a.kind);
  RunManifest manifest;
  manifest.command = "inject";
  nlohmann::ordered_json config;
  config["kind"] = a.kind;
  config["rate"] = a.spec.rate;
  config["seed"] = a.spec.seed;
  config["label_a"] = a.spec.label_a;
  config["label_b"] = a.spec.label_b;
  config["target_label"] = a.spec.target_label;
  config["outlier_label"] = a.spec.outlier_label;
  config["area_fraction"] = a.spec.area_fraction;
  config["fill_value"] = a.spec.fill_value;
  config["group_tag"] = a.spec.group_tag;
  manifest.config_json = config.dump();
  WithManifest(a.out + ".manifest.json", manifest, [&](RunManifest& m) {
    m.AddInput(a.in);
    Dataset d = LoadDataset(a.in);
    Dataset noisy = ApplyNoise(d, a.spec);
    SaveDataset(a.out, noisy);
    m.outputs.push_back(a.out);
    size_t changed = 0;
    std::map<std::string, const Instance*> after;
    for (const auto& inst : noisy.instances) after[inst.id] = &inst;
    for (const auto& inst : d.instances) {
      auto it = after.find(inst.id);
      if (it == after.end() || !(*it->second == inst)) ++changed;
    }
    fmt::print("changed={} total={}\n", changed, d.size());
  });
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::string arch = "linear";
  TrainConfig cfg;
  std::string warm_start;
  std::string reference;
  std::string eval;
  std::string eval_log;
};

void RunTrain(TrainArgs a) {
  a.cfg.arch = ParseArch(a.arch);
  if (a.eval_log.empty() != a.eval.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--eval and --eval-log must be given together");
  }
  RunManifest manifest;
  manifest.command = "train";
  nlohmann::ordered_json config;
  config["arch"] = a.arch;
  config["hidden_units"] = a.cfg.hidden_units;
  config["learning_rate"] = a.cfg.learning_rate;
  config["epochs"] = a.cfg.epochs;
  config["batch_size"] = a.cfg.batch_size;
  config["seed"] = a.cfg.seed;
  config["lambda_c"] = a.cfg.lambda_c;
  manifest.config_json = config.dump();
  WithManifest(a.out + ".manifest.json", manifest, [&](RunManifest& m) {
    m.AddInput(a.data);
    if (!a.warm_start.empty()) {
      m.AddInput(a.warm_start);
      a.cfg.warm_start_from = LoadModel(a.warm_start);
    }
    if (!a.reference.empty()) {
      m.AddInput(a.reference);
      a.cfg.reference_model = LoadModel(a.reference);
    }
    Dataset d = LoadDataset(a.data);
    std::optional<Dataset> eval;
    std::vector<EvalSet> eval_sets;
    if (!a.eval.empty()) {
      m.AddInput(a.eval);
      eval = LoadDataset(a.eval);
      eval_sets.push_back({fs::path(a.eval).stem().string(), &*eval});
    }
    TrainResult result = Train(d, a.cfg, eval_sets);
    SaveModel(a.out, result.params);
    m.outputs.push_back(a.out);
    if (!a.eval_log.empty()) {
      SaveEpochEvalLog(a.eval_log, result.eval_logs[0]);
      m.outputs.push_back(a.eval_log);
    }
    fmt::print("arch={} instances={} epochs={}\n", ArchName(result.params.arch),
               d.size(), a.cfg.epochs);
  });
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string model_id;
};

void RunPredict(const PredictArgs& a) {
  RunManifest manifest;
  manifest.command = "predict";
  std::string id =
      a.model_id.empty() ? fs::path(a.model).stem().string() : a.model_id;
  manifest.config_json = nlohmann::ordered_json{{"model_id", id}}.dump();
  WithManifest(a.out + ".manifest.json", manifest, [&](RunManifest& m) {
    m.AddInput(a.model);
    m.AddInput(a.data);
    PredictionLog log = Predict(LoadModel(a.model), LoadDataset(a.data), id);
    SavePredictionLog(a.out, log);
    m.outputs.push_back(a.out);
    size_t correct = 0;
    for (const auto& r : log.records) correct += r.correct() ? 1 : 0;
    double accuracy = log.records.empty() ? 0.0
                                          : static_cast<double>(correct) /
                                                static_cast<double>(log.records.size());
    fmt::print("accuracy={}\n", FormatFixed4(accuracy));
  });
}

struct ForgettingArgs {
  std::string eval_log;
  std::string h1;
  std::string h2;
  std::string h1_eval;
  std::string h2_eval;
  bool allow_partial = false;
  std::string out;
};

std::string ForgettingCsv(const ForgettingArgs& a, RunManifest* m) {
  auto input = [&](const std::string& path) {
    if (m != nullptr) m->AddInput(path);
    return path;
  };
  if (!a.eval_log.empty()) {
    ForgettingCounts counts =
        CountForgettingEvents(LoadEpochEvalLog(input(a.eval_log)));
    std::string csv = "id,forgetting_events\n";
    for (const auto& [id, n] : counts.counts) {
      csv += fmt::format("{},{}\n", CsvField(id), n);
    }
    return csv;
  }
  if (a.h1.empty() || a.h2.empty() || a.h1_eval.empty() || a.h2_eval.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "need --eval-log, or all of --h1 --h2 --h1-eval --h2-eval");
  }
  UpdateComparison cmp = Align(LoadLogReporting(input(a.h1)),
                               LoadLogReporting(input(a.h2)), a.allow_partial);
  return ForgettingTableCsv(ForgettingByQuadrant(
      cmp, CountForgettingEvents(LoadEpochEvalLog(input(a.h1_eval))),
      CountForgettingEvents(LoadEpochEvalLog(input(a.h2_eval)))));
}

void RunForgetting(const ForgettingArgs& a) {
  if (a.out.empty()) {
    fmt::print("{}", ForgettingCsv(a, nullptr));
    return;
  }
  RunManifest manifest;
  manifest.command = "forgetting";
  manifest.config_json =
      nlohmann::ordered_json{{"allow_partial", a.allow_partial}}.dump();
  WithManifest(a.out + ".manifest.json", manifest, [&](RunManifest& m) {
    WriteFile(a.out, ForgettingCsv(a, &m));
    m.outputs.push_back(a.out);
    fmt::print("wrote {}\n", a.out);
  });
}

struct ValidateArgs {
  std::string path;
  std::string kind = "log";
};

void RunValidate(const ValidateArgs& a) {
  if (a.kind == "log") {
    LogParseResult r = LoadPredictionLog(a.path);
    ValidateLog(r.log);
    for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
    fmt::print("ok: {} records, {} warnings\n", r.log.records.size(),
               r.warnings.size());
  } else if (a.kind == "dataset") {
    Dataset d = LoadDataset(a.path);
    fmt::print("ok: {} instances\n", d.size());
  } else if (a.kind == "model") {
    ModelParams p = LoadModel(a.path);
    fmt::print("ok: {} model, {} classes\n", ArchName(p.arch), p.num_classes());
  } else if (a.kind == "eval-log") {
    EpochEvalLog log = LoadEpochEvalLog(a.path);
    fmt::print("ok: {} examples, {} epochs\n", log.example_ids.size(),
               log.epochs());
  } else if (a.kind == "charmap") {
    Charmap m = LoadCharmap(a.path);
    fmt::print("ok: {} labels\n", m.size());
  } else if (a.kind == "char-accuracy") {
    CharAccuracyTable t = ParseCharAccuracyCsv(ReadFile(a.path), a.path);
    fmt::print("ok: {} characters\n", t.accuracy.size());
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown kind " + a.kind);
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"Backward-compatibility analysis for model updates"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::function<void()> action;

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Compare an (h1, h2) pair of prediction logs");
  c->add_option("h1", compare.h1, "Prediction log of the old model")->required();
  c->add_option("h2", compare.h2, "Prediction log of the updated model")->required();
  c->add_flag("--allow-partial", compare.allow_partial,
              "Restrict to the shared ids instead of failing");
  c->add_option("--group-by", compare.group_by, "label or tag:<namespace>")
      ->capture_default_str();
  c->add_option("--hist-bins", compare.hist_bins, "Confidence histogram bins")
      ->capture_default_str();
  c->add_option("--hist-model", compare.hist_model, "Histogram model")
      ->check(CLI::IsMember({"h1", "h2"}))
      ->capture_default_str();
  c->add_option("--out-dir", compare.out_dir, "Directory for report files");
  c->callback([&] { action = [&] { RunCompare(compare); }; });

  std::string run_config;
  RunOverrides run_overrides;
  auto* r = app.add_subcommand("run", "Run an experiment config");
  r->add_option("config", run_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option_function<std::string>(
      "--output-dir", [&](const std::string& v) { run_overrides.output_dir = v; },
      "Override output_dir");
  r->add_option_function<int>(
      "--workers", [&](const int& v) { run_overrides.workers = v; },
      "Worker threads (default: BCOMPAT_WORKERS or 1)");
  r->callback([&] {
    action = [&] {
      RunOutcome outcome = RunConfigFile(run_config, run_overrides);
      fmt::print("{} {} out={}\n", outcome.experiment, outcome.summary,
                 outcome.output_dir);
    };
  });

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset");
  s->add_option("--kind", synth.kind,
                "blobs-binary, blobs-multiclass, glyph-grid or tokens-binary")
      ->capture_default_str();
  s->add_option("--size", synth.options.size)->capture_default_str();
  s->add_option("--seed", synth.options.seed)->capture_default_str();
  s->add_option("--geometry-seed", synth.options.geometry_seed)->capture_default_str();
  s->add_option("--id-prefix", synth.options.id_prefix)->capture_default_str();
  s->add_option("--mean-offset", synth.options.mean_offset)->capture_default_str();
  s->add_option("--classes", synth.options.classes)->capture_default_str();
  s->add_option("--dim", synth.options.dim)->capture_default_str();
  s->add_option("--center-scale", synth.options.center_scale)->capture_default_str();
  s->add_option("--cluster-std", synth.options.cluster_std)->capture_default_str();
  s->add_option("--pixel-noise", synth.options.pixel_noise)->capture_default_str();
  s->add_option("--group-fraction", synth.options.group_fraction)
      ->capture_default_str();
  s->add_option("--group-tag", synth.options.group_tag)->capture_default_str();
  s->add_option("--out", synth.out, "Output dataset (JSON Lines)")->required();
  s->callback([&] { action = [&] { RunSynth(synth); }; });

  InjectArgs inject;
  auto* n = app.add_subcommand("inject", "Inject noise into a dataset");
  n->add_option("--in", inject.in)->required();
  n->add_option("--out", inject.out)->required();
  n->add_option("--kind", inject.kind,
                "label_swap, feature_occlusion, outlier_merge or group_flip")
      ->required();
  n->add_option("--rate", inject.spec.rate)->required();
  n->add_option("--seed", inject.spec.seed)->capture_default_str();
  n->add_option("--label-a", inject.spec.label_a);
  n->add_option("--label-b", inject.spec.label_b);
  n->add_option("--target-label", inject.spec.target_label);
  n->add_option("--outlier-label", inject.spec.outlier_label);
  n->add_option("--area-fraction", inject.spec.area_fraction)->capture_default_str();
  n->add_option("--fill-value", inject.spec.fill_value)->capture_default_str();
  n->add_option("--group-tag", inject.spec.group_tag);
  n->callback([&] { action = [&] { RunInject(inject); }; });

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a classifier");
  t->add_option("--data", train.data)->required();
  t->add_option("--out", train.out, "Output model (JSON)")->required();
  t->add_option("--arch", train.arch)
      ->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  t->add_option("--hidden-units", train.cfg.hidden_units)->capture_default_str();
  t->add_option("--lr", train.cfg.learning_rate)->capture_default_str();
  t->add_option("--epochs", train.cfg.epochs)->capture_default_str();
  t->add_option("--batch-size", train.cfg.batch_size)->capture_default_str();
  t->add_option("--seed", train.cfg.seed)->capture_default_str();
  t->add_option("--warm-start", train.warm_start, "Initial model");
  t->add_option("--lambda-c", train.cfg.lambda_c)->capture_default_str();
  t->add_option("--reference", train.reference, "Reference model for lambda-c");
  t->add_option("--eval", train.eval, "Dataset evaluated after every epoch");
  t->add_option("--eval-log", train.eval_log, "Per-epoch correctness log");
  t->callback([&] { action = [&] { RunTrain(train); }; });

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "Write a prediction log");
  p->add_option("--model", predict.model)->required();
  p->add_option("--data", predict.data)->required();
  p->add_option("--out", predict.out)->required();
  p->add_option("--model-id", predict.model_id, "Defaults to the model file stem");
  p->callback([&] { action = [&] { RunPredict(predict); }; });

  ForgettingArgs forgetting;
  auto* f = app.add_subcommand("forgetting", "Count forgetting events");
  f->add_option("--eval-log", forgetting.eval_log, "Per-id counts of one log");
  f->add_option("--h1", forgetting.h1, "h1 prediction log");
  f->add_option("--h2", forgetting.h2, "h2 prediction log");
  f->add_option("--h1-eval", forgetting.h1_eval, "h1 per-epoch log");
  f->add_option("--h2-eval", forgetting.h2_eval, "h2 per-epoch log");
  f->add_flag("--allow-partial", forgetting.allow_partial);
  f->add_option("--out", forgetting.out, "Output CSV (default stdout)");
  f->callback([&] { action = [&] { RunForgetting(forgetting); }; });

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "Check an input file");
  v->add_option("path", validate.path)->required();
  v->add_option("--kind", validate.kind)
      ->check(CLI::IsMember(
          {"log", "dataset", "model", "eval-log", "charmap", "char-accuracy"}))
      ->capture_default_str();
  v->callback([&] { action = [&] { RunValidate(validate); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    action();
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace bcompat

int main(int argc, char** argv) { return bcompat::Main(argc, argv); }
