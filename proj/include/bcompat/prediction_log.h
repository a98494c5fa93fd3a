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

// Prediction logs: one model's labeled predictions over a test set.
//
// On disk a log is JSON Lines. The first line is a header
//
//   {"model_id": "resnet-v2", "label_set": [0, 1, 2]}
//
// and every following line is one record
//
//   {"id": "img-0007", "y": 2, "pred": 1, "conf": 0.71, "groups": ["a:b"]}
//
// where "conf" and "groups" may be null or absent. A CSV variant with columns
// id,y,pred,conf,groups (groups separated by ';') is accepted as well; it may
// start with "# model_id=NAME" and "# label_set=0;1;2" comment lines, and
// otherwise takes the model id from the file stem and the label set from the
// labels it contains.

#ifndef BCOMPAT_PREDICTION_LOG_H_
#define BCOMPAT_PREDICTION_LOG_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcompat {

using Label = int;

struct PredictionRecord {
  std::string example_id;
  Label true_label = 0;
  Label predicted_label = 0;
  // Score of the predicted label (max softmax), in [0, 1].
  std::optional<double> confidence;
  std::vector<std::string> groups;

  bool correct() const { return true_label == predicted_label; }
  bool operator==(const PredictionRecord&) const = default;
};

struct PredictionLog {
  std::string model_id;
  std::vector<Label> label_set;
  std::vector<PredictionRecord> records;
  bool operator==(const PredictionLog&) const = default;
};

// Checks the log invariants: non-empty duplicate-free label set, unique ids,
// labels inside the label set, confidences in [0, 1]. Throws Error.
void ValidateLog(const PredictionLog& log);

struct LogParseResult {
  PredictionLog log;
  // Non-fatal findings such as unknown keys. Empty for a conforming file.
  std::vector<std::string> warnings;
};

// `source` names the input in diagnostics. Failures throw ParseError with the
// offending line number.
LogParseResult ParsePredictionLogJsonl(std::string_view text,
                                       const std::string& source);
LogParseResult ParsePredictionLogCsv(std::string_view text,
                                     const std::string& source,
                                     const std::string& default_model_id);

// Chooses the CSV reader for a ".csv" extension, JSON Lines otherwise.
LogParseResult LoadPredictionLog(const std::string& path);

std::string SerializePredictionLog(const PredictionLog& log);
void SavePredictionLog(const std::string& path, const PredictionLog& log);

}  // namespace bcompat

#endif  // BCOMPAT_PREDICTION_LOG_H_
