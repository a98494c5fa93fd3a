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

#include "bcompat/prediction_log.h"

#include <algorithm>
#include <filesystem>
#include <set>
#include <unordered_set>

#include "bcompat/error.h"
#include "bcompat/text_io.h"
#include "json.hpp"

namespace bcompat {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Tracks the per-record invariants while a log is read, so failures can point
// at a line.
class RecordChecker {
 public:
  explicit RecordChecker(const std::vector<Label>& label_set)
      : labels_(label_set.begin(), label_set.end()) {}

  // Returns an empty string when the record is valid.
  std::string Check(const PredictionRecord& r) {
    if (!ids_.insert(r.example_id).second) {
      return "duplicate example id '" + r.example_id + "'";
    }
    if (!labels_.count(r.true_label)) {
      return "true label " + std::to_string(r.true_label) +
             " is not in the label set";
    }
    if (!labels_.count(r.predicted_label)) {
      return "predicted label " + std::to_string(r.predicted_label) +
             " is not in the label set";
    }
    if (r.confidence && !(*r.confidence >= 0.0 && *r.confidence <= 1.0)) {
      return "confidence " + FormatDouble(*r.confidence) +
             " is outside [0, 1]";
    }
    return {};
  }

 private:
  std::set<Label> labels_;
  std::unordered_set<std::string> ids_;
};

std::string CheckLabelSet(const std::vector<Label>& label_set) {
  if (label_set.empty()) return "label_set is empty";
  std::set<Label> seen;
  for (const Label l : label_set) {
    if (!seen.insert(l).second) {
      return "label_set contains duplicate label " + std::to_string(l);
    }
  }
  return {};
}

Label ReadLabel(const Json& v, const char* key) {
  if (v.is_array()) {
    throw Error(ErrorCode::kParseError,
                std::string("'") + key +
                    "' is a list; multi-label logs are not supported");
  }
  if (v.is_number_float()) {
    throw Error(ErrorCode::kParseError,
                std::string("'") + key +
                    "' is not an integer label; regression logs are not "
                    "supported");
  }
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kParseError,
                std::string("'") + key + "' must be an integer label");
  }
  return v.get<Label>();
}

PredictionRecord RecordFromJson(const Json& obj,
                                std::vector<std::string>& unknown_keys) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParseError, "record is not a JSON object");
  }
  PredictionRecord r;
  bool has_id = false, has_y = false, has_pred = false;
  for (const auto& [key, value] : obj.items()) {
    if (key == "id") {
      if (!value.is_string()) {
        throw Error(ErrorCode::kParseError, "'id' must be a string");
      }
      r.example_id = value.get<std::string>();
      has_id = true;
    } else if (key == "y") {
      r.true_label = ReadLabel(value, "y");
      has_y = true;
    } else if (key == "pred") {
      r.predicted_label = ReadLabel(value, "pred");
      has_pred = true;
    } else if (key == "conf") {
      if (value.is_null()) continue;
      if (!value.is_number()) {
        throw Error(ErrorCode::kParseError, "'conf' must be a number or null");
      }
      r.confidence = value.get<double>();
    } else if (key == "groups") {
      if (value.is_null()) continue;
      if (!value.is_array()) {
        throw Error(ErrorCode::kParseError, "'groups' must be a list or null");
      }
      for (const auto& g : value) {
        if (!g.is_string()) {
          throw Error(ErrorCode::kParseError, "group tags must be strings");
        }
        r.groups.push_back(g.get<std::string>());
      }
    } else {
      unknown_keys.push_back(key);
    }
  }
  if (!has_id) throw Error(ErrorCode::kParseError, "missing 'id'");
  if (!has_y) throw Error(ErrorCode::kParseError, "missing 'y'");
  if (!has_pred) throw Error(ErrorCode::kParseError, "missing 'pred'");
  return r;
}

std::vector<std::string> SplitGroups(std::string_view field) {
  std::vector<std::string> groups;
  if (field.empty()) return groups;
  size_t start = 0;
  while (true) {
    const size_t end = field.find(';', start);
    const std::string g =
        Trim(field.substr(start, end == std::string_view::npos
                                     ? std::string_view::npos
                                     : end - start));
    if (!g.empty()) groups.push_back(g);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return groups;
}

}  // namespace

void ValidateLog(const PredictionLog& log) {
  if (const auto msg = CheckLabelSet(log.label_set); !msg.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "log '" + log.model_id + "': " + msg);
  }
  RecordChecker checker(log.label_set);
  for (const auto& r : log.records) {
    if (const auto msg = checker.Check(r); !msg.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "log '" + log.model_id + "': " + msg);
    }
  }
}

LogParseResult ParsePredictionLogJsonl(std::string_view text,
                                       const std::string& source) {
  LogParseResult result;
  const auto lines = SplitLines(text);
  bool have_header = false;
  std::optional<RecordChecker> checker;
  for (size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (Trim(lines[i]).empty()) continue;
    Json obj;
    try {
      obj = Json::parse(lines[i]);
    } catch (const Json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed JSON: ") +
                                            e.what());
    }
    try {
      if (!have_header) {
        if (!obj.is_object() || !obj.contains("model_id") ||
            !obj.contains("label_set")) {
          throw Error(ErrorCode::kParseError,
                      "first line must be a header with 'model_id' and "
                      "'label_set'");
        }
        for (const auto& [key, value] : obj.items()) {
          if (key == "model_id") {
            if (!value.is_string()) {
              throw Error(ErrorCode::kParseError,
                          "'model_id' must be a string");
            }
            result.log.model_id = value.get<std::string>();
          } else if (key == "label_set") {
            if (!value.is_array()) {
              throw Error(ErrorCode::kParseError,
                          "'label_set' must be a list of integers");
            }
            for (const auto& l : value) {
              result.log.label_set.push_back(ReadLabel(l, "label_set"));
            }
          } else {
            result.warnings.push_back(source + ":" + std::to_string(line_no) +
                                      ": unknown header key '" + key + "'");
          }
        }
        if (const auto msg = CheckLabelSet(result.log.label_set);
            !msg.empty()) {
          throw Error(ErrorCode::kParseError, msg);
        }
        checker.emplace(result.log.label_set);
        have_header = true;
        continue;
      }
      std::vector<std::string> unknown;
      PredictionRecord r = RecordFromJson(obj, unknown);
      for (const auto& key : unknown) {
        result.warnings.push_back(source + ":" + std::to_string(line_no) +
                                  ": unknown record key '" + key + "'");
      }
      if (const auto msg = checker->Check(r); !msg.empty()) {
        throw Error(ErrorCode::kParseError, msg);
      }
      result.log.records.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.message());
    } catch (const Json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(source, 1, "missing header line");
  return result;
}

LogParseResult ParsePredictionLogCsv(std::string_view text,
                                     const std::string& source,
                                     const std::string& default_model_id) {
  LogParseResult result;
  result.log.model_id = default_model_id;
  const auto lines = SplitLines(text);
  std::optional<std::vector<Label>> declared_labels;
  std::vector<std::string> columns;
  int col_id = -1, col_y = -1, col_pred = -1, col_conf = -1, col_groups = -1;
  size_t i = 0;

  auto fail = [&](size_t index, const std::string& msg) -> ParseError {
    return ParseError(source, static_cast<int>(index) + 1, msg);
  };

  for (; i < lines.size(); ++i) {
    const std::string line = Trim(lines[i]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = Trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = Trim(std::string_view(body).substr(0, eq));
      const std::string value = Trim(std::string_view(body).substr(eq + 1));
      if (key == "model_id") {
        result.log.model_id = value;
      } else if (key == "label_set") {
        declared_labels.emplace();
        try {
          for (const auto& tok : SplitGroups(value)) {
            declared_labels->push_back(static_cast<Label>(ParseInt(tok)));
          }
        } catch (const Error&) {
          throw fail(i, "bad label_set comment");
        }
      } else {
        result.warnings.push_back(source + ":" + std::to_string(i + 1) +
                                  ": unknown comment key '" + key + "'");
      }
      continue;
    }
    columns = SplitCsvLine(line);
    for (size_t c = 0; c < columns.size(); ++c) {
      const std::string name = Trim(columns[c]);
      const int ci = static_cast<int>(c);
      if (name == "id") col_id = ci;
      else if (name == "y") col_y = ci;
      else if (name == "pred") col_pred = ci;
      else if (name == "conf") col_conf = ci;
      else if (name == "groups") col_groups = ci;
      else
        result.warnings.push_back(source + ":" + std::to_string(i + 1) +
                                  ": unknown column '" + name + "'");
    }
    if (col_id < 0 || col_y < 0 || col_pred < 0) {
      throw fail(i, "CSV header must name columns id, y and pred");
    }
    ++i;
    break;
  }
  if (columns.empty()) throw ParseError(source, 1, "missing CSV header row");

  std::vector<size_t> record_lines;
  for (; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto fields = SplitCsvLine(lines[i]);
    if (fields.size() != columns.size()) {
      throw fail(i, "expected " + std::to_string(columns.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    PredictionRecord r;
    try {
      r.example_id = fields[col_id];
      const std::string y = Trim(fields[col_y]);
      const std::string pred = Trim(fields[col_pred]);
      if (pred.find(';') != std::string::npos) {
        throw Error(ErrorCode::kParseError,
                    "multi-label predictions are not supported");
      }
      r.true_label = static_cast<Label>(ParseInt(y));
      r.predicted_label = static_cast<Label>(ParseInt(pred));
      if (col_conf >= 0) {
        const std::string conf = Trim(fields[col_conf]);
        if (!conf.empty() && conf != "null") r.confidence = ParseDouble(conf);
      }
      if (col_groups >= 0) r.groups = SplitGroups(fields[col_groups]);
    } catch (const Error& e) {
      throw fail(i, e.message());
    }
    if (r.example_id.empty()) throw fail(i, "empty example id");
    result.log.records.push_back(std::move(r));
    record_lines.push_back(i);
  }

  if (declared_labels) {
    result.log.label_set = *declared_labels;
  } else {
    std::set<Label> labels;
    for (const auto& r : result.log.records) {
      labels.insert(r.true_label);
      labels.insert(r.predicted_label);
    }
    result.log.label_set.assign(labels.begin(), labels.end());
  }
  if (const auto msg = CheckLabelSet(result.log.label_set); !msg.empty()) {
    throw ParseError(source, 1, msg);
  }
  RecordChecker checker(result.log.label_set);
  for (size_t k = 0; k < result.log.records.size(); ++k) {
    if (const auto msg = checker.Check(result.log.records[k]); !msg.empty()) {
      throw fail(record_lines[k], msg);
    }
  }
  return result;
}

LogParseResult LoadPredictionLog(const std::string& path) {
  const std::string text = ReadFile(path);
  const std::filesystem::path p(path);
  if (p.extension() == ".csv") {
    return ParsePredictionLogCsv(text, path, p.stem().string());
  }
  return ParsePredictionLogJsonl(text, path);
}

std::string SerializePredictionLog(const PredictionLog& log) {
  std::string out;
  OrderedJson header;
  header["model_id"] = log.model_id;
  header["label_set"] = log.label_set;
  out += header.dump();
  out += '\n';
  for (const auto& r : log.records) {
    OrderedJson obj;
    obj["id"] = r.example_id;
    obj["y"] = r.true_label;
    obj["pred"] = r.predicted_label;
    obj["conf"] = r.confidence ? OrderedJson(*r.confidence) : OrderedJson();
    obj["groups"] = r.groups.empty() ? OrderedJson() : OrderedJson(r.groups);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void SavePredictionLog(const std::string& path, const PredictionLog& log) {
  WriteFile(path, SerializePredictionLog(log));
}

}  // namespace bcompat
