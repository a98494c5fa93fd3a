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

// Runs an experiment described by a JSON config file and writes its outputs
// and a manifest into the output directory.
//
// A config names the experiment and everything it needs:
//
//   {
//     "experiment": "noise-sweep",
//     "seed": 2026,
//     "output_dir": "runs/quickstart",
//     "datasets": {
//       "big":   {"synth": {"kind": "blobs-multiclass", "size": 5000, "seed": 1}},
//       "small": {"subset_of": "big", "per_class": 20},
//       "test":  {"path": "data/test.jsonl"}
//     },
//     "trainer": {"arch": "linear", "learning_rate": 0.05, "epochs": 10,
//                 "batch_size": 32},
//     "noise": {"kind": "label_swap", "label_a": 0, "label_b": 1},
//     "rates": [0.0, 0.1, 0.2],
//     "trials": 5
//   }
//
// Relative dataset and log paths resolve against the config file's
// directory; "output_dir" resolves against the working directory. See the
// README for the keys of each experiment.

#ifndef BCOMPAT_RUNNER_H_
#define BCOMPAT_RUNNER_H_

#include <optional>
#include <string>

namespace bcompat {

struct RunOverrides {
  std::optional<std::string> output_dir;
  std::optional<int> workers;
};

struct RunOutcome {
  std::string experiment;
  std::string output_dir;
  // One machine-parseable line for the console.
  std::string summary;
};

// Throws Error(kConfigError) naming the offending field for invalid configs.
// Once the output directory is known, manifest.json is written there with
// status "incomplete" and rewritten as "complete" or "failed".
RunOutcome RunConfigFile(const std::string& config_path,
                         const RunOverrides& overrides = {});

// Worker count from BCOMPAT_WORKERS, or 1.
int DefaultWorkers();

}  // namespace bcompat

#endif  // BCOMPAT_RUNNER_H_
