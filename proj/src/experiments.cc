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

#include "bcompat/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <set>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "bcompat/error.h"
#include "bcompat/rng.h"

namespace bcompat {
namespace {

// Runs fn(0..n-1) on up to `workers` threads. If jobs fail, the exception of
// the lowest failing job index is rethrown.
void RunJobs(size_t n, int workers, const std::function<void(size_t)>& fn) {
  const size_t threads =
      std::min(n, static_cast<size_t>(std::max(workers, 1)));
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

uint64_t TestFingerprint(const Dataset& test) {
  std::vector<std::string> ids;
  ids.reserve(test.size());
  for (const auto& inst : test.instances) ids.push_back(inst.id);
  std::sort(ids.begin(), ids.end());
  uint64_t h = 0;
  for (const auto& id : ids) h = DeriveSeed({h, HashString(id)});
  return h;
}

TrainConfig ColdConfig(const TrainConfig& cfg, uint64_t seed) {
  TrainConfig out = cfg;
  out.seed = seed;
  out.warm_start_from.reset();
  out.reference_model.reset();
  out.lambda_c = 0.0;
  return out;
}

std::string ModelId(const char* role, size_t trial) {
  return fmt::format("{}-trial{}", role, trial);
}

// Accuracy on the records selected by `in_subgroup`; nullopt if none.
std::optional<double> SubgroupAccuracy(
    const PredictionLog& log,
    const std::function<bool(const PredictionRecord&)>& in_subgroup) {
  size_t n = 0;
  size_t right = 0;
  for (const auto& r : log.records) {
    if (!in_subgroup(r)) continue;
    ++n;
    right += r.correct();
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(right) / static_cast<double>(n);
}

// Fills the comparison-derived fields of `t`.
void Fill(TrialResult& t, const PredictionLog& h1_log,
          const PredictionLog& h2_log, const Dataset& test,
          const RunOptions& options) {
  const UpdateComparison cmp = Align(h1_log, h2_log);
  t.report = Compare(cmp);
  t.label_groups = GroupBreakdown(cmp, GroupBy::kTrueLabel);
  if (options.tag_namespace) {
    t.tag_groups = GroupBreakdown(cmp, GroupBy::kTag, *options.tag_namespace);
  }
  t.test_fingerprint = TestFingerprint(test);
}

void CheckIncreasing(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is empty");
  }
  for (size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " must be strictly increasing");
    }
  }
}

void CheckSubset(const Dataset& small, const Dataset& big) {
  std::unordered_set<std::string> ids;
  for (const auto& inst : big.instances) ids.insert(inst.id);
  for (const auto& inst : small.instances) {
    if (!ids.count(inst.id)) {
      throw Error(ErrorCode::kSubsetViolation,
                  "example '" + inst.id +
                      "' of the small set is missing from the big set");
    }
  }
}

// Removes the outlier class from a clean set, leaving other classes intact.
Dataset StripOutliers(const Dataset& d, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::kOutlierMerge) return d;
  return InjectOutlierNoise(d, spec.outlier_label, spec.target_label, 0.0, 0);
}

std::function<bool(const PredictionRecord&)> SubgroupOf(const NoiseSpec& spec) {
  if (spec.kind == NoiseKind::kGroupFlip) {
    const std::string tag = spec.group_tag;
    return [tag](const PredictionRecord& r) {
      return std::find(r.groups.begin(), r.groups.end(), tag) != r.groups.end();
    };
  }
  const auto labels = NoiseTargetLabels(spec);
  return [labels](const PredictionRecord& r) {
    return std::find(labels.begin(), labels.end(), r.true_label) != labels.end();
  };
}

void AddGroupGains(const std::vector<TrialResult>& trials,
                   const std::vector<GroupRow> TrialResult::*rows,
                   std::map<std::string, MeanStd>& out) {
  std::map<std::string, std::vector<double>> gains;
  for (const auto& t : trials) {
    for (const auto& row : t.*rows) gains[row.group].push_back(row.gain);
  }
  for (const auto& [group, values] : gains) out[group] = Summarize(values);
}

SweepCell Reduce(double axis_value, const std::vector<TrialResult>& trials) {
  SweepCell cell;
  cell.axis_value = axis_value;
  cell.trials = trials.size();
  std::vector<double> btc, bec, acc1, acc2, gain, sub1, sub2;
  for (const auto& t : trials) {
    btc.push_back(t.report.btc);
    bec.push_back(t.report.bec);
    acc1.push_back(t.report.acc_h1);
    acc2.push_back(t.report.acc_h2);
    gain.push_back(t.report.accuracy_gain);
    if (t.subgroup_acc_h1) sub1.push_back(*t.subgroup_acc_h1);
    if (t.subgroup_acc_h2) sub2.push_back(*t.subgroup_acc_h2);
  }
  cell.btc = Summarize(btc);
  cell.bec = Summarize(bec);
  cell.acc_h1 = Summarize(acc1);
  cell.acc_h2 = Summarize(acc2);
  cell.accuracy_gain = Summarize(gain);
  if (!sub1.empty()) cell.subgroup_acc_h1 = Summarize(sub1);
  if (!sub2.empty()) cell.subgroup_acc_h2 = Summarize(sub2);
  AddGroupGains(trials, &TrialResult::label_groups, cell.label_group_gain);
  AddGroupGains(trials, &TrialResult::tag_groups, cell.tag_group_gain);
  return cell;
}

// Shared body of the noise and lambda sweeps. `axis` holds rates or
// lambdas; `configure` sets the noise spec and trainer config of one cell.
SweepResult UpdateSweep(
    const char* axis_name, const Dataset& d_clean_small, const Dataset& d_big,
    const Dataset& d_test, const NoiseSpec& spec_template,
    const std::vector<double>& axis, const TrainConfig& cfg, size_t trials,
    const RunOptions& options,
    const std::function<void(double, NoiseSpec&, TrainConfig&)>& configure) {
  CheckIncreasing(axis, axis_name);
  if (trials == 0) {
    throw Error(ErrorCode::kInvalidArgument, "trials must be positive");
  }
  CheckSubset(d_clean_small, d_big);
  const Dataset small = StripOutliers(d_clean_small, spec_template);
  const Dataset test = StripOutliers(d_test, spec_template);
  const auto in_subgroup = SubgroupOf(spec_template);

  // results[cell][trial]
  std::vector<std::vector<TrialResult>> results(
      axis.size(), std::vector<TrialResult>(trials));
  RunJobs(trials, options.workers, [&](size_t t) {
    const uint64_t seed_h1 = TrialSeed(options.root_seed, t, SeedRole::kH1);
    const uint64_t seed_h2 = TrialSeed(options.root_seed, t, SeedRole::kH2Update);
    const uint64_t noise_seed = TrialSeed(options.root_seed, t, SeedRole::kNoise);
    const ModelParams h1 = Train(small, ColdConfig(cfg, seed_h1)).params;
    const PredictionLog h1_log = Predict(h1, test, ModelId("h1", t));
    std::optional<Dataset> noisy;
    std::optional<double> noisy_rate;
    for (size_t c = 0; c < axis.size(); ++c) {
      NoiseSpec spec = spec_template;
      spec.seed = noise_seed;
      TrainConfig cfg2 = cfg;
      cfg2.seed = seed_h2;
      cfg2.warm_start_from = h1;
      cfg2.reference_model = h1;
      configure(axis[c], spec, cfg2);
      if (!noisy_rate || *noisy_rate != spec.rate) {
        noisy = ApplyNoise(d_big, spec);
        noisy_rate = spec.rate;
      }
      const ModelParams h2 = Train(*noisy, cfg2).params;
      TrialResult& r = results[c][t];
      r.trial_index = t;
      r.axis_value = axis[c];
      r.seed_h1 = seed_h1;
      r.seed_h2 = seed_h2;
      r.noise_seed = noise_seed;
      const PredictionLog h2_log = Predict(h2, test, ModelId("h2", t));
      Fill(r, h1_log, h2_log, test, options);
      r.subgroup_acc_h1 = SubgroupAccuracy(h1_log, in_subgroup);
      r.subgroup_acc_h2 = SubgroupAccuracy(h2_log, in_subgroup);
    }
  });

  SweepResult out;
  out.axis_name = axis_name;
  for (size_t c = 0; c < axis.size(); ++c) {
    out.cells.push_back(Reduce(axis[c], results[c]));
    for (auto& r : results[c]) out.trials.push_back(std::move(r));
  }
  if (trials >= 2) {
    RunOptions baseline_options = options;
    baseline_options.validation = nullptr;
    baseline_options.tag_namespace.reset();
    out.baseline =
        StochasticityBaseline(small, test, cfg, trials, baseline_options)
            .aggregate;
  }
  return out;
}

}  // namespace

uint64_t TrialSeed(uint64_t root_seed, size_t trial, SeedRole role) {
  return DeriveSeed({root_seed, static_cast<uint64_t>(trial),
                     static_cast<uint64_t>(role)});
}

MeanStd Summarize(const std::vector<double>& values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

BaselineResult StochasticityBaseline(const Dataset& d_train,
                                     const Dataset& d_test,
                                     const TrainConfig& cfg, size_t n_trials,
                                     const RunOptions& options) {
  if (n_trials < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "a stochasticity baseline needs at least 2 trials");
  }
  BaselineResult out;
  out.trials.resize(n_trials);
  RunJobs(n_trials, options.workers, [&](size_t t) {
    TrialResult& r = out.trials[t];
    r.trial_index = t;
    r.seed_h1 = TrialSeed(options.root_seed, t, SeedRole::kH1);
    r.seed_h2 = TrialSeed(options.root_seed, t, SeedRole::kH2);
    std::vector<EvalSet> evals;
    if (options.validation) evals.push_back({"validation", options.validation});
    const auto h1 = Train(d_train, ColdConfig(cfg, r.seed_h1), evals);
    const auto h2 = Train(d_train, ColdConfig(cfg, r.seed_h2), evals);
    Fill(r, Predict(h1.params, d_test, ModelId("h1", t)),
         Predict(h2.params, d_test, ModelId("h2", t)), d_test, options);
    if (options.validation) {
      const UpdateComparison val = Align(
          Predict(h1.params, *options.validation, ModelId("h1", t)),
          Predict(h2.params, *options.validation, ModelId("h2", t)));
      r.forgetting = ForgettingByQuadrant(
          val, CountForgettingEvents(h1.eval_logs[0]),
          CountForgettingEvents(h2.eval_logs[0]));
    }
  });
  std::vector<double> acc1, acc2, btc, bec;
  for (const auto& t : out.trials) {
    acc1.push_back(t.report.acc_h1);
    acc2.push_back(t.report.acc_h2);
    btc.push_back(t.report.btc);
    bec.push_back(t.report.bec);
  }
  out.aggregate = {Summarize(acc1), Summarize(acc2), Summarize(btc),
                   Summarize(bec)};
  return out;
}

std::vector<size_t> SaturationCurve(const std::vector<TrialResult>& trials) {
  if (trials.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "saturation needs at least 1 trial");
  }
  std::vector<size_t> curve;
  std::set<std::string> seen;
  for (const auto& t : trials) {
    if (t.test_fingerprint != trials.front().test_fingerprint) {
      throw Error(ErrorCode::kTestSetMismatch,
                  "trial " + std::to_string(t.trial_index) +
                      " was evaluated on a different test set");
    }
    seen.insert(t.report.incompatible_ids.begin(), t.report.incompatible_ids.end());
    curve.push_back(seen.size());
  }
  return curve;
}

SweepResult NoiseSweep(const Dataset& d_clean_small, const Dataset& d_big,
                       const Dataset& d_test, const NoiseSpec& spec_template,
                       const std::vector<double>& rates, const TrainConfig& cfg,
                       size_t trials_per_rate, const RunOptions& options) {
  SweepResult out = UpdateSweep("rates", d_clean_small, d_big, d_test, spec_template,
                     rates, cfg, trials_per_rate, options,
                     [](double rate, NoiseSpec& spec, TrainConfig&) {
                       spec.rate = rate;
                     });
  out.axis_name = "rate";
  return out;
}

SweepResult LambdaSweep(const Dataset& d_clean_small, const Dataset& d_big,
                        const Dataset& d_test, const NoiseSpec& noise,
                        const std::vector<double>& lambdas,
                        const TrainConfig& cfg, size_t trials,
                        const RunOptions& options) {
  if (lambdas.empty() || lambdas.front() != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "lambdas must start at 0");
  }
  SweepResult out = UpdateSweep(
      "lambdas", d_clean_small, d_big, d_test, noise, lambdas, cfg, trials,
      options, [](double lambda, NoiseSpec&, TrainConfig& c) { c.lambda_c = lambda; });
  out.axis_name = "lambda_c";
  return out;
}

double LeastSquaresSlope(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "slope needs two equally long series of at least 2 points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "slope needs distinct x values");
  }
  return sxy / sxx;
}

ForgettingTable AverageForgetting(const std::vector<TrialResult>& trials) {
  ForgettingTable out;
  for (const auto& t : trials) {
    if (!t.forgetting) continue;
    if (out.cells.empty()) {
      out.cells = t.forgetting->cells;
      for (auto& c : out.cells) c.n = 0;
    }
  }
  for (size_t i = 0; i < out.cells.size(); ++i) {
    std::vector<double> means;
    size_t n = 0;
    for (const auto& t : trials) {
      if (!t.forgetting) continue;
      const auto& c = t.forgetting->cells[i];
      n += c.n;
      if (c.n > 0) means.push_back(c.mean);
    }
    const MeanStd s = Summarize(means);
    out.cells[i].mean = s.mean;
    out.cells[i].stddev = s.std;
    out.cells[i].n = n;
  }
  return out;
}

}  // namespace bcompat
