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

// Multi-trial experiment designs built from the trainer, the noise lab and
// the compatibility metrics.
//
// Trial i draws every seed from (root_seed, i, role), so adding trials never
// changes earlier ones. Trials run concurrently on up to `workers` threads
// and are reduced in (axis value, trial) order, which keeps every number
// independent of the worker count.

#ifndef BCOMPAT_EXPERIMENTS_H_
#define BCOMPAT_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcompat/compat.h"
#include "bcompat/dataset.h"
#include "bcompat/forgetting.h"
#include "bcompat/noise.h"
#include "bcompat/trainer.h"

namespace bcompat {

enum class SeedRole : uint64_t {
  kH1 = 1,        // Reference model training.
  kH2 = 2,        // Retrained model in a no-update baseline.
  kH2Update = 3,  // Updated model trained on the larger dataset.
  kNoise = 4,     // Noise injection.
};

uint64_t TrialSeed(uint64_t root_seed, size_t trial, SeedRole role);

struct RunOptions {
  uint64_t root_seed = 0;
  int workers = 1;
  // When set, per-trial group tables by tag use this namespace in addition
  // to the per-label table.
  std::optional<std::string> tag_namespace;
  // Baseline only: evaluation set for per-epoch logs and forgetting tables.
  const Dataset* validation = nullptr;
};

struct TrialResult {
  size_t trial_index = 0;
  // Noise rate or lambda_c for sweeps; absent for baselines.
  std::optional<double> axis_value;
  uint64_t seed_h1 = 0;
  uint64_t seed_h2 = 0;
  std::optional<uint64_t> noise_seed;
  CompatibilityReport report;
  std::vector<GroupRow> label_groups;
  std::vector<GroupRow> tag_groups;  // Empty without a tag namespace.
  // Accuracy of each model on the noise-targeted labels (or the flipped
  // group); absent for baselines and when no test record is targeted.
  std::optional<double> subgroup_acc_h1;
  std::optional<double> subgroup_acc_h2;
  std::optional<ForgettingTable> forgetting;
  // Hash of the sorted test ids; trials compared on one test set share it.
  uint64_t test_fingerprint = 0;
};

// Mean and population standard deviation.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd Summarize(const std::vector<double>& values);

struct BaselineAggregate {
  MeanStd acc_h1;
  MeanStd acc_h2;
  MeanStd btc;
  MeanStd bec;
};

struct BaselineResult {
  std::vector<TrialResult> trials;
  BaselineAggregate aggregate;
};

// Trains h1 and h2 on identical data with distinct derived seeds (weights and
// data order both vary) and compares them on `d_test`. With a validation set
// each trial also carries a forgetting table computed on it.
BaselineResult StochasticityBaseline(const Dataset& d_train,
                                     const Dataset& d_test,
                                     const TrainConfig& cfg, size_t n_trials,
                                     const RunOptions& options = {});

// u_k = number of distinct incompatible ids over the first k trials, for
// k = 1..n. Throws kTestSetMismatch when trials used different test sets.
std::vector<size_t> SaturationCurve(const std::vector<TrialResult>& trials);

struct SweepCell {
  double axis_value = 0.0;
  size_t trials = 0;
  MeanStd btc;
  MeanStd bec;
  MeanStd acc_h1;
  MeanStd acc_h2;
  MeanStd accuracy_gain;
  std::optional<MeanStd> subgroup_acc_h1;
  std::optional<MeanStd> subgroup_acc_h2;
  std::map<std::string, MeanStd> label_group_gain;
  std::map<std::string, MeanStd> tag_group_gain;
};

struct SweepResult {
  std::string axis_name;  // "rate" or "lambda_c".
  std::vector<SweepCell> cells;
  std::vector<TrialResult> trials;  // Ordered by (axis value, trial).
  // No-update baseline on the small clean set with the same seeds.
  BaselineAggregate baseline;
};

// For each trial: trains h1 on `d_clean_small` once, then for each rate
// corrupts all of `d_big` with the trial's noise seed, warm-starts h2 from h1
// and compares both on `d_test`. For outlier merges the outlier class is
// also removed from the small and test sets. Throws kSubsetViolation when
// `d_clean_small` has an id missing from `d_big`, and kInvalidArgument for
// rates that are not strictly increasing.
SweepResult NoiseSweep(const Dataset& d_clean_small, const Dataset& d_big,
                       const Dataset& d_test, const NoiseSpec& spec_template,
                       const std::vector<double>& rates, const TrainConfig& cfg,
                       size_t trials_per_rate, const RunOptions& options = {});

// The noise sweep at the fixed `noise` setting, with h2 trained under the
// penalized loss for each lambda_c (reference model h1). Seeds match
// NoiseSweep, so the lambda_c = 0 cell equals the noise sweep cell at the
// same rate. `lambdas` must be strictly increasing and start at 0.
SweepResult LambdaSweep(const Dataset& d_clean_small, const Dataset& d_big,
                        const Dataset& d_test, const NoiseSpec& noise,
                        const std::vector<double>& lambdas,
                        const TrainConfig& cfg, size_t trials,
                        const RunOptions& options = {});

// Least-squares slope of y on x.
double LeastSquaresSlope(const std::vector<double>& x,
                         const std::vector<double>& y);

// Mean over trials of each cell's mean, skipping trials where the quadrant
// is empty. `stddev` is the spread of those per-trial means and n sums the
// per-trial counts.
ForgettingTable AverageForgetting(const std::vector<TrialResult>& trials);

}  // namespace bcompat

#endif  // BCOMPAT_EXPERIMENTS_H_
