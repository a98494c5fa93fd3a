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

#include <filesystem>
#include <map>
#include <string>

#include "bcompat/error.h"
#include "bcompat/prediction_log.h"
#include "bcompat/text_io.h"
#include "bcompat/trainer.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace bcompat {
namespace {

namespace fs = std::filesystem;

const char kSmallSweep[] = R"({
  "experiment": "noise-sweep",
  "seed": 3,
  "output_dir": "unused",
  "datasets": {
    "big": {"synth": {"kind": "blobs-multiclass", "size": 300, "seed": 1,
                      "classes": 3, "dim": 4, "id_prefix": "b"}},
    "small": {"subset_of": "big", "per_class": 10},
    "test": {"synth": {"kind": "blobs-multiclass", "size": 150, "seed": 2,
                       "classes": 3, "dim": 4, "id_prefix": "t"}}
  },
  "trainer": {"learning_rate": 0.1, "epochs": 3, "batch_size": 16},
  "noise": {"kind": "label_swap", "label_a": 0, "label_b": 1},
  "rates": [0.0, 0.3],
  "trials": 2
})";

std::string WriteConfig(const std::string& dir, const std::string& text) {
  std::string path = (fs::path(dir) / "config.json").string();
  WriteFile(path, text);
  return path;
}

std::string ConfigErrorMessage(const std::string& path,
                               const RunOverrides& overrides) {
  try {
    RunConfigFile(path, overrides);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError) << e.what();
    return e.message();
  }
  ADD_FAILURE() << "no Error thrown";
  return "";
}

std::map<std::string, std::string> ReadTree(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), dir).string()] =
          ReadFile(entry.path().string());
    }
  }
  return files;
}

nlohmann::json ReadJson(const std::string& path) {
  return nlohmann::json::parse(ReadFile(path));
}

TEST(RunConfig, SweepWritesOutputsAndCompleteManifest) {
  std::string dir = testing::TempDir("runner_sweep");
  std::string out = dir + "/out";
  RunOutcome outcome = RunConfigFile(WriteConfig(dir, kSmallSweep), {out, 1});
  EXPECT_EQ(outcome.experiment, "noise-sweep");

  std::string agg = ReadFile(out + "/aggregate.csv");
  std::vector<std::string> lines = SplitLines(agg);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].substr(0, 11), "rate,trials");
  EXPECT_EQ(lines[1].substr(0, 4), "0,2,");
  EXPECT_EQ(lines[2].substr(0, 6), "0.3,2,");

  nlohmann::json summary = ReadJson(out + "/summary.json");
  EXPECT_TRUE(summary["h1_shared_across_axis"].get<bool>());

  nlohmann::json manifest = ReadJson(out + "/manifest.json");
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(manifest["command"], "run");
  EXPECT_FALSE(manifest["config"].contains("output_dir"));
  std::map<std::string, int> listed;
  for (const auto& o : manifest["outputs"]) listed[o.get<std::string>()]++;
  for (const auto& [name, contents] : ReadTree(out)) {
    if (name == "manifest.json") continue;
    EXPECT_EQ(listed[name], 1) << name;
  }
  EXPECT_EQ(listed.size() + 1, ReadTree(out).size());
  EXPECT_TRUE(listed.count("trials/cell_01_trial_001.json"));
}

TEST(RunConfig, ReplayIsByteIdenticalAcrossWorkerCounts) {
  std::string dir = testing::TempDir("runner_replay");
  std::string config = WriteConfig(dir, kSmallSweep);
  RunConfigFile(config, {dir + "/a", 1});
  RunConfigFile(config, {dir + "/b", 1});
  RunConfigFile(config, {dir + "/c", 3});
  auto a = ReadTree(dir + "/a");
  EXPECT_EQ(a, ReadTree(dir + "/b"));
  EXPECT_EQ(a, ReadTree(dir + "/c"));
}

TEST(RunConfig, ValidationNamesTheField) {
  std::string dir = testing::TempDir("runner_validation");
  auto with = [&](const std::string& key, const nlohmann::json& value) {
    nlohmann::json j = nlohmann::json::parse(kSmallSweep);
    if (value.is_null()) {
      j.erase(key);
    } else {
      j[key] = value;
    }
    return WriteConfig(dir, j.dump());
  };
  RunOverrides o{dir + "/out", 1};
  EXPECT_EQ(ConfigErrorMessage(with("rates", {0.2, 0.1}), o),
            "rates: must be strictly increasing");
  EXPECT_EQ(ConfigErrorMessage(with("rates", {0.1, 0.1}), o),
            "rates: must be strictly increasing");
  EXPECT_EQ(ConfigErrorMessage(with("rates", nullptr), o), "rates: required");
  EXPECT_EQ(ConfigErrorMessage(with("trials", 0), o), "trials: must be >= 1");
  EXPECT_EQ(ConfigErrorMessage(with("bogus", 1), o), "bogus: unknown key");
  EXPECT_EQ(ConfigErrorMessage(with("experiment", "fly"), o),
            "experiment: unknown experiment 'fly'");
  EXPECT_EQ(ConfigErrorMessage(with("seed", -1), o),
            "seed: must be a non-negative integer");
  EXPECT_EQ(ConfigErrorMessage(with("noise", {{"kind", "label_swap"}}), o),
            "noise.label_a: required");

  nlohmann::json j = nlohmann::json::parse(kSmallSweep);
  j["datasets"]["small"]["subset_of"] = "small";
  EXPECT_EQ(ConfigErrorMessage(WriteConfig(dir, j.dump()), o),
            "datasets.small: circular subset_of reference");
  j = nlohmann::json::parse(kSmallSweep);
  j["trainer"]["arch"] = "cnn";
  EXPECT_NE(ConfigErrorMessage(WriteConfig(dir, j.dump()), o)
                .find("trainer.arch"),
            std::string::npos);

  j = nlohmann::json::parse(kSmallSweep);
  j.erase("output_dir");
  EXPECT_EQ(ConfigErrorMessage(WriteConfig(dir, j.dump()), {}),
            "output_dir: required");

  j = nlohmann::json::parse(kSmallSweep);
  j["experiment"] = "lambda-sweep";
  j["lambdas"] = {0.5, 1.0};
  j["noise"]["rate"] = 0.3;
  EXPECT_EQ(ConfigErrorMessage(WriteConfig(dir, j.dump()), o),
            "lambdas: must start at 0");
}

TEST(RunConfig, FailureIsRecordedInManifest) {
  std::string dir = testing::TempDir("runner_failure");
  nlohmann::json j = nlohmann::json::parse(kSmallSweep);
  j["datasets"]["test"] = {{"path", "missing.jsonl"}};
  std::string out = dir + "/out";
  EXPECT_THROW(RunConfigFile(WriteConfig(dir, j.dump()), {out, 1}), Error);
  nlohmann::json manifest = ReadJson(out + "/manifest.json");
  EXPECT_EQ(manifest["status"], "failed");
  EXPECT_NE(manifest["error"].get<std::string>().find("missing.jsonl"),
            std::string::npos);
}

TEST(RunConfig, BaselineWritesSaturationAndForgetting) {
  std::string dir = testing::TempDir("runner_baseline");
  const char* config = R"({
    "experiment": "saturation",
    "seed": 1,
    "output_dir": "unused",
    "datasets": {
      "train": {"synth": {"kind": "blobs-binary", "size": 200, "seed": 1}},
      "test": {"synth": {"kind": "blobs-binary", "size": 100, "seed": 2,
                         "id_prefix": "t"}},
      "validation": {"synth": {"kind": "blobs-binary", "size": 100, "seed": 3,
                               "id_prefix": "v"}}
    },
    "trainer": {"epochs": 3},
    "trials": 4
  })";
  std::string out = dir + "/out";
  RunConfigFile(WriteConfig(dir, config), {out, 1});
  std::vector<std::string> curve =
      SplitLines(ReadFile(out + "/curves/saturation.csv"));
  ASSERT_EQ(curve.size(), 5u);
  EXPECT_EQ(curve[0], "trials,unique_incompatible");
  EXPECT_EQ(SplitLines(ReadFile(out + "/forgetting.csv")).size(), 9u);
  EXPECT_TRUE(fs::exists(out + "/trials/trial_003.json"));
}

TEST(RunConfig, PipelineFromLogFiles) {
  std::string dir = testing::TempDir("runner_pipeline");
  // Character 'a' (label 0) is always right for h1 and half right for h2;
  // 'b' (label 1) is always right for both.
  PredictionLog h1{"h1", {0, 1}, {}};
  PredictionLog h2{"h2", {0, 1}, {}};
  for (int i = 0; i < 4; ++i) {
    h1.records.push_back({"a" + std::to_string(i), 0, 0, std::nullopt, {}});
    h2.records.push_back({"a" + std::to_string(i), 0, i % 2, std::nullopt, {}});
    h1.records.push_back({"b" + std::to_string(i), 1, 1, std::nullopt, {}});
    h2.records.push_back({"b" + std::to_string(i), 1, 1, std::nullopt, {}});
  }
  SavePredictionLog(dir + "/h1.jsonl", h1);
  SavePredictionLog(dir + "/h2.jsonl", h2);
  WriteFile(dir + "/charmap.csv", "label,char\n0,a\n1,b\n");
  WriteFile(dir + "/blacklist.txt", "bb\naa\nab\n");
  std::string config = WriteConfig(dir, R"({
    "experiment": "pipeline",
    "output_dir": "unused",
    "logs": {"h1": "h1.jsonl", "h2": "h2.jsonl"},
    "charmap": "charmap.csv",
    "blacklist": "blacklist.txt"
  })");
  std::string out = dir + "/out";
  RunOutcome outcome = RunConfigFile(config, {out, 1});
  EXPECT_EQ(outcome.summary, "words=3 more_error_prone=2");
  EXPECT_EQ(ReadFile(out + "/blacklist_report.csv"),
            "word,error_h1,error_h2,delta\n"
            "aa,0,0.75,0.75\n"
            "ab,0,0.5,0.5\n"
            "bb,0,0,0\n");
  EXPECT_EQ(ReadFile(out + "/char_accuracy_h2.csv"),
            "char,accuracy\na,0.5\nb,1\n");
  nlohmann::json manifest = ReadJson(out + "/manifest.json");
  ASSERT_EQ(manifest["inputs"].size(), 4u);
  EXPECT_EQ(manifest["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST(RunConfig, ForgettingFromLogFiles) {
  std::string dir = testing::TempDir("runner_forgetting");
  auto [h1, h2] = testing::TenPointFixture();
  SavePredictionLog(dir + "/h1.jsonl", h1);
  SavePredictionLog(dir + "/h2.jsonl", h2);
  // Example "8" goes correct, wrong, correct, wrong under h1.
  EpochEvalLog e1{"val", {}, {}};
  for (int i = 1; i <= 10; ++i) e1.example_ids.push_back(std::to_string(i));
  EpochEvalLog e2 = e1;
  for (int epoch = 0; epoch < 4; ++epoch) {
    std::vector<bool> correct(10, false);
    correct[7] = epoch % 2 == 0;
    e1.correct.push_back(correct);
  }
  e2.correct.push_back(std::vector<bool>(10, true));
  SaveEpochEvalLog(dir + "/h1.eval.jsonl", e1);
  SaveEpochEvalLog(dir + "/h2.eval.jsonl", e2);
  std::string config = WriteConfig(dir, R"({
    "experiment": "forgetting",
    "output_dir": "unused",
    "logs": {"h1": "h1.jsonl", "h2": "h2.jsonl"},
    "eval_logs": {"h1": "h1.eval.jsonl", "h2": "h2.eval.jsonl"}
  })");
  std::string out = dir + "/out";
  RunOutcome outcome = RunConfigFile(config, {out, 1});
  EXPECT_EQ(outcome.summary.substr(0, 21), "BTC=0.8571 BEC=0.6667");
  std::string csv = ReadFile(out + "/forgetting.csv");
  EXPECT_NE(csv.find("h1w_h2c,h1,2,0,1\n"), std::string::npos) << csv;
}

TEST(DefaultWorkers, ReadsEnvironment) {
  setenv("BCOMPAT_WORKERS", "4", 1);
  EXPECT_EQ(DefaultWorkers(), 4);
  setenv("BCOMPAT_WORKERS", "zero", 1);
  EXPECT_THROW(DefaultWorkers(), Error);
  unsetenv("BCOMPAT_WORKERS");
  EXPECT_EQ(DefaultWorkers(), 1);
}

}  // namespace
}  // namespace bcompat
