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

// Fixture builders shared by the unit tests.

#ifndef BCOMPAT_TESTS_TEST_UTIL_H_
#define BCOMPAT_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bcompat/prediction_log.h"
#include "bcompat/rng.h"

namespace bcompat::testing {

// A binary log over ids "1".."n" where example i is correct iff i is in
// `correct`. True labels are all 0; wrong predictions are 1.
inline PredictionLog BinaryLog(const std::string& model_id, int n,
                               const std::set<int>& correct) {
  PredictionLog log{model_id, {0, 1}, {}};
  for (int i = 1; i <= n; ++i) {
    PredictionRecord r;
    r.example_id = std::to_string(i);
    r.true_label = 0;
    r.predicted_label = correct.count(i) ? 0 : 1;
    log.records.push_back(r);
  }
  return log;
}

// The hand-enumerated 10-point update: h1 correct on 1..7, h2 correct on
// 1..6 and 8.
inline std::pair<PredictionLog, PredictionLog> TenPointFixture() {
  return {BinaryLog("h1", 10, {1, 2, 3, 4, 5, 6, 7}),
          BinaryLog("h2", 10, {1, 2, 3, 4, 5, 6, 8})};
}

// Random log pair with up to `max_points` records over up to `max_labels`
// labels. h2 shares ids and true labels with h1.
inline std::pair<PredictionLog, PredictionLog> RandomLogPair(
    Rng& rng, int max_points, int max_labels) {
  const int n = 1 + static_cast<int>(rng.UniformInt(max_points));
  const int k = 1 + static_cast<int>(rng.UniformInt(max_labels));
  // Skews accuracy so degenerate all-right / all-wrong logs show up too.
  const double p1 = rng.Uniform();
  const double p2 = rng.Uniform();
  PredictionLog h1{"h1", {}, {}};
  for (int l = 0; l < k; ++l) h1.label_set.push_back(l);
  PredictionLog h2{"h2", h1.label_set, {}};
  for (int i = 0; i < n; ++i) {
    PredictionRecord r1;
    r1.example_id = "ex" + std::to_string(i);
    r1.true_label = static_cast<int>(rng.UniformInt(k));
    PredictionRecord r2 = r1;
    auto draw = [&](double p) {
      if (rng.Bernoulli(p) || k == 1) return r1.true_label;
      return static_cast<int>((r1.true_label + 1 + rng.UniformInt(k - 1)) % k);
    };
    r1.predicted_label = draw(p1);
    r2.predicted_label = draw(p2);
    r1.confidence = rng.Uniform(1.0 / k, 1.0);
    r2.confidence = rng.Uniform(1.0 / k, 1.0);
    h1.records.push_back(r1);
    h2.records.push_back(r2);
  }
  return {h1, h2};
}

inline std::string TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("bcompat_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace bcompat::testing

#endif  // BCOMPAT_TESTS_TEST_UTIL_H_
