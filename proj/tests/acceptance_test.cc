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

// Acceptance gate. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero when any fails. Experiment criteria are judged on the outputs of
// the shipped configs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "bcompat/compat.h"
#include "bcompat/pipeline.h"
#include "bcompat/rng.h"
#include "bcompat/runner.h"
#include "bcompat/text_io.h"
#include "bcompat/trainer.h"
#include "json.hpp"
#include "test_util.h"

namespace bcompat {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using Rational = boost::multiprecision::cpp_rational;

struct Verdict {
  bool pass = false;
  std::string detail;
};

const std::string& RunsDir() {
  static const std::string dir = testing::TempDir("acceptance");
  return dir;
}

std::string ConfigPath(const std::string& name) {
  return std::string(BCOMPAT_CONFIG_DIR) + "/" + name + ".json";
}

// Runs a shipped config once per process and returns its output directory.
std::string Run(const std::string& name) {
  static std::map<std::string, std::string> done;
  if (auto it = done.find(name); it != done.end()) return it->second;
  std::string out = RunsDir() + "/" + name;
  RunConfigFile(ConfigPath(name), {out, 1});
  return done[name] = out;
}

std::vector<Json> Trials(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir + "/trials")) {
    names.push_back(e.path().string());
  }
  std::sort(names.begin(), names.end());
  std::vector<Json> trials;
  for (const auto& n : names) trials.push_back(Json::parse(ReadFile(n)));
  return trials;
}

// Rows of a CSV file as column-name -> value maps.
std::vector<std::map<std::string, std::string>> Csv(const std::string& path) {
  std::vector<std::string> lines = SplitLines(ReadFile(path));
  std::vector<std::string> header = SplitCsvLine(lines.at(0));
  std::vector<std::map<std::string, std::string>> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cells = SplitCsvLine(lines[i]);
    std::map<std::string, std::string> row;
    for (size_t c = 0; c < header.size(); ++c) row[header[c]] = cells.at(c);
    rows.push_back(row);
  }
  return rows;
}

double Slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Verdict MetricOracle() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(20260101);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto [h1, h2] = testing::RandomLogPair(rng, 1000, 10);
    size_t bc = 0, bw = 0, cw = 0, wc = 0;
    for (size_t i = 0; i < h1.records.size(); ++i) {
      bool c1 = h1.records[i].true_label == h1.records[i].predicted_label;
      bool c2 = h2.records[i].true_label == h2.records[i].predicted_label;
      bc += c1 && c2;
      bw += !c1 && !c2;
      cw += c1 && !c2;
      wc += !c1 && c2;
    }
    double btc = bc + cw == 0 ? 1.0 : static_cast<double>(bc) / (bc + cw);
    double bec = bw + cw == 0 ? 1.0 : static_cast<double>(bw) / (bw + cw);
    CompatibilityReport r = Compare(Align(h1, h2));
    if (r.btc != btc || r.bec != bec || r.quadrants.both_correct != bc ||
        r.quadrants.both_wrong != bw || r.quadrants.h1c_h2w != cw ||
        r.quadrants.h1w_h2c != wc || r.btc_denominator_zero != (bc + cw == 0) ||
        r.bec_denominator_zero != (bw + cw == 0)) {
      ++mismatches;
    }
  }
  double secs = Seconds(start);
  return {mismatches == 0 && secs < 10.0,
          fmt::format("{} mismatches in 1000 pairs, {:.2f}s", mismatches, secs)};
}

Verdict DegenerateConventions() {
  PredictionLog h1 = testing::BinaryLog("h1", 6, {1, 2, 3});
  PredictionLog perfect = testing::BinaryLog("h2", 6, {1, 2, 3, 4, 5, 6});
  PredictionLog all_wrong = testing::BinaryLog("h1", 6, {});
  CompatibilityReport a = Compare(Align(h1, perfect));
  CompatibilityReport b = Compare(Align(all_wrong, h1));
  bool pass = a.bec == 1.0 && a.bec_denominator_zero && b.btc == 1.0 &&
              b.btc_denominator_zero;
  return {pass, fmt::format("perfect h2: BEC={} flag={}; all-wrong h1: BTC={} "
                            "flag={}",
                            a.bec, a.bec_denominator_zero, b.btc,
                            b.btc_denominator_zero)};
}

Verdict StochasticityBaselineCriterion() {
  auto start = std::chrono::steady_clock::now();
  std::string dir = Run("baseline");
  double secs = Seconds(start);
  std::vector<Json> trials = Trials(dir);
  double btc = 0, bec = 0;
  for (const auto& t : trials) {
    btc += t["report"]["btc"].get<double>();
    bec += t["report"]["bec"].get<double>();
  }
  btc /= trials.size();
  bec /= trials.size();
  bool pass = trials.size() == 25 && btc < 0.999 && bec < 0.99 && secs < 120;
  return {pass, fmt::format("{} trials, mean BTC={:.4f} BEC={:.4f}, {:.2f}s",
                            trials.size(), btc, bec, secs)};
}

Verdict ForgettingOrder() {
  std::vector<Json> trials = Trials(Run("baseline"));
  int ordered = 0;
  for (const auto& t : trials) {
    std::map<std::string, double> mean;
    for (const auto& c : t.at("forgetting")) {
      double m = c["mean"].is_number() ? c["mean"].get<double>() : NAN;
      mean[c["quadrant"].get<std::string>() + "/" + c["model"].get<std::string>()] = m;
    }
    bool ok = true;
    for (const char* m : {"h1", "h2"}) {
      double bc = mean[std::string("both_correct/") + m];
      double bw = mean[std::string("both_wrong/") + m];
      double cw = mean[std::string("h1c_h2w/") + m];
      ok = ok && bc < bw && bw < cw;
    }
    ordered += ok;
  }
  return {ordered >= 20,
          fmt::format("order holds for both models in {}/{} trials", ordered,
                      trials.size())};
}

Verdict SaturationShape() {
  auto rows = Csv(Run("baseline") + "/curves/saturation.csv");
  std::vector<double> u = {0.0};
  for (const auto& r : rows) u.push_back(ParseDouble(r.at("unique_incompatible")));
  bool monotone = std::is_sorted(u.begin(), u.end());
  bool pass = u.size() == 26 && monotone && u[5] - u[0] > u[25] - u[20];
  return {pass, fmt::format("u5-u0={} u25-u20={} non-decreasing={}", u[5] - u[0],
                            u.size() == 26 ? u[25] - u[20] : -1.0, monotone)};
}

Verdict LabelNoiseSweep() {
  auto start = std::chrono::steady_clock::now();
  std::string dir = Run("label-noise-sweep");
  double secs = Seconds(start);
  std::vector<double> rate, bec;
  bool gains = true;
  std::string gain_text;
  for (const auto& r : Csv(dir + "/aggregate.csv")) {
    rate.push_back(ParseDouble(r.at("rate")));
    bec.push_back(ParseDouble(r.at("bec_mean")));
    double gain = ParseDouble(r.at("gain_mean"));
    if (rate.back() <= 0.3 + 1e-12) {
      gains = gains && gain > 0;
      gain_text += fmt::format(" {:.4f}", gain);
    }
  }
  double slope = Slope(rate, bec);
  bool grid = rate == std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  return {grid && slope < 0 && gains && secs < 600,
          fmt::format("BEC slope={:.4f}, gains for rate<=0.3:{}, {:.2f}s", slope,
                      gain_text, secs)};
}

Verdict GroupFlip() {
  std::vector<Json> trials = Trials(Run("group-flip"));
  int enriched = 0, both_gain = 0, at_rate = 0;
  std::string shares;
  for (const auto& t : trials) {
    if (std::abs(t["axis_value"].get<double>() - 0.45) > 1e-12) continue;
    ++at_rate;
    double share = 0;
    for (const auto& g : t.at("tag_groups")) {
      if (g["group"] == "comedy") share = g["incompatible_share"].get<double>();
    }
    shares += fmt::format(" {:.3f}", share);
    bool enriched_here = share > 0.20;
    enriched += enriched_here;
    bool nonneg = true;
    for (const auto& g : t.at("label_groups")) {
      nonneg = nonneg && g["gain"].get<double>() >= 0;
    }
    both_gain += enriched_here && nonneg;
  }
  return {at_rate == 5 && enriched >= 4 && both_gain >= 1,
          fmt::format("comedy share:{}; enriched {}/{}; enriched with both class "
                      "gains >= 0 in {}",
                      shares, enriched, at_rate, both_gain)};
}

double MaxGradientError(Arch arch, double lambda_c) {
  Rng rng(77);
  Dataset batch;
  batch.label_set = {0, 1, 2};
  for (int i = 0; i < 12; ++i) {
    Instance inst;
    inst.id = std::to_string(i);
    inst.label = i % 3;
    for (int f = 0; f < 4; ++f) inst.features.push_back(rng.Normal());
    batch.instances.push_back(inst);
  }
  TrainConfig cfg;
  cfg.lambda_c = lambda_c;
  cfg.reference_model = InitModel(arch, 5, batch.label_set, 4, 1);
  ModelParams params = InitModel(arch, 5, batch.label_set, 4, 2);
  LossGradient lg = ComputeLossGradient(params, batch, cfg);
  double worst = 0.0;
  const double h = 1e-6;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    for (size_t k = 0; k < params.layers[l].data.size(); ++k) {
      ModelParams plus = params, minus = params;
      plus.layers[l].data[k] += h;
      minus.layers[l].data[k] -= h;
      double numeric = (Loss(plus, batch, cfg) - Loss(minus, batch, cfg)) / (2 * h);
      double analytic = lg.grads[l].data[k];
      double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

Verdict LambdaSweepCriterion() {
  std::vector<double> lambda, btc, bec;
  for (const auto& r : Csv(Run("lambda-sweep") + "/aggregate.csv")) {
    lambda.push_back(ParseDouble(r.at("lambda_c")));
    btc.push_back(ParseDouble(r.at("btc_mean")));
    bec.push_back(ParseDouble(r.at("bec_mean")));
  }
  double sb = Slope(lambda, btc), se = Slope(lambda, bec);
  double grad = std::max({MaxGradientError(Arch::kLinear, 2.0),
                          MaxGradientError(Arch::kMlp, 2.0),
                          MaxGradientError(Arch::kLinear, 0.5),
                          MaxGradientError(Arch::kMlp, 0.5)});
  bool grid = lambda == std::vector<double>{0.0, 0.5, 1.0, 2.0, 4.0};
  return {grid && sb >= 0 && se >= 0 && grad < 1e-4,
          fmt::format("BTC slope={:.4f} BEC slope={:.4f}, max gradient rel "
                      "error={:.2e}",
                      sb, se, grad)};
}

Verdict PipelineFormula() {
  Rng rng(4242);
  const std::u32string alphabet = U"abcdefgh";
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    CharAccuracyTable table;
    std::map<char32_t, Rational> exact;
    for (char32_t c : alphabet) {
      long long den = 1 + static_cast<long long>(rng.UniformInt(1000));
      long long num = static_cast<long long>(rng.UniformInt(den + 1));
      exact[c] = Rational(num, den);
      table.accuracy[c] = static_cast<double>(num) / static_cast<double>(den);
    }
    size_t length = 1 + rng.UniformInt(6);
    std::u32string word;
    for (size_t i = 0; i < length; ++i) {
      word += alphabet[rng.UniformInt(alphabet.size())];
    }
    // Probability of at least one misrecognition, summed over all 2^L
    // right/wrong outcomes except the all-right one.
    Rational error = 0;
    for (size_t mask = 1; mask < (size_t{1} << length); ++mask) {
      Rational p = 1;
      for (size_t i = 0; i < length; ++i) {
        p *= (mask >> i & 1) ? Rational(1) - exact[word[i]] : exact[word[i]];
      }
      error += p;
    }
    worst = std::max(worst, std::abs(WordError(word, table) -
                                     static_cast<double>(error)));
  }
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    CharAccuracyTable table;
    for (char32_t c : alphabet) table.accuracy[c] = rng.Uniform();
    size_t length = 1 + rng.UniformInt(12);
    std::u32string word;
    double max_single = 0, sum = 0;
    for (size_t i = 0; i < length; ++i) {
      char32_t c = alphabet[rng.UniformInt(alphabet.size())];
      word += c;
      max_single = std::max(max_single, 1 - table.accuracy[c]);
      sum += 1 - table.accuracy[c];
    }
    double e = WordError(word, table);
    if (e < max_single - 1e-12 || e > sum + 1e-12) ++violations;
  }
  return {worst <= 1e-12 && violations == 0,
          fmt::format("max oracle error={:.2e} over 2000 words; {} bound "
                      "violations in 10000 tables",
                      worst, violations)};
}

std::map<std::string, std::string> Tree(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).string()] = ReadFile(e.path().string());
    }
  }
  return files;
}

Verdict DeterministicReplay() {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(BCOMPAT_CONFIG_DIR)) {
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  int identical = 0;
  std::string detail;
  for (const auto& name : names) {
    std::string first = Run(name);
    std::string again = RunsDir() + "/" + name + ".replay";
    RunConfigFile(ConfigPath(name), {again, 2});
    auto a = Tree(first);
    bool same = a == Tree(again);
    identical += same;
    detail += fmt::format(" {}={}", name, same ? "identical" : "DIFFERENT");
  }
  return {!names.empty() && identical == static_cast<int>(names.size()),
          fmt::format("{} configs:{}", names.size(), detail)};
}

}  // namespace
}  // namespace bcompat

int main() {
  using bcompat::Verdict;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"metric oracle equivalence", bcompat::MetricOracle},
      {"degenerate conventions", bcompat::DegenerateConventions},
      {"stochasticity baseline", bcompat::StochasticityBaselineCriterion},
      {"forgetting correlation", bcompat::ForgettingOrder},
      {"saturation shape", bcompat::SaturationShape},
      {"label-noise sweep", bcompat::LabelNoiseSweep},
      {"group-flip enrichment", bcompat::GroupFlip},
      {"lambda_c regularization", bcompat::LambdaSweepCriterion},
      {"pipeline formula", bcompat::PipelineFormula},
      {"determinism and replay", bcompat::DeterministicReplay},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    fmt::print("[{}] {}: {}\n", v.pass ? "PASS" : "FAIL", name, v.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed,
             criteria.size());
  return failed == 0 ? 0 : 1;
}
