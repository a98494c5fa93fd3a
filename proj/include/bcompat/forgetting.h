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

// Example forgetting: how often a model that got an example right at the end
// of one epoch gets it wrong at the end of the next.

#ifndef BCOMPAT_FORGETTING_H_
#define BCOMPAT_FORGETTING_H_

#include <map>
#include <string>
#include <vector>

#include "bcompat/compat.h"
#include "bcompat/trainer.h"

namespace bcompat {

struct ForgettingCounts {
  std::map<std::string, int> counts;
  size_t epochs_observed = 0;
};

// Counts correct -> incorrect transitions between consecutive epochs. An
// example wrong in the first epoch has no event there. Throws kEmptyLog for a
// log without epochs.
ForgettingCounts CountForgettingEvents(const EpochEvalLog& log);

struct ForgettingCell {
  Quadrant quadrant = Quadrant::kBothCorrect;
  WhichModel model = WhichModel::kH1;
  double mean = 0.0;  // NaN when the quadrant is empty.
  double stddev = 0.0;  // Population standard deviation; NaN when empty.
  size_t n = 0;
};

// Cells in quadrant order (both_correct, both_wrong, h1c_h2w, h1w_h2c), h1
// before h2 within a quadrant.
struct ForgettingTable {
  std::vector<ForgettingCell> cells;

  const ForgettingCell& at(Quadrant q, WhichModel m) const;
};

// Mean and spread of each model's forgetting counts over the examples of
// each quadrant of `cmp`. Throws kIdCoverageMismatch when either count map
// misses an aligned id.
ForgettingTable ForgettingByQuadrant(const UpdateComparison& cmp,
                                     const ForgettingCounts& h1,
                                     const ForgettingCounts& h2);

// CSV with header quadrant,model,mean,std,n. Empty quadrants print "nan".
std::string ForgettingTableCsv(const ForgettingTable& table);

}  // namespace bcompat

#endif  // BCOMPAT_FORGETTING_H_
