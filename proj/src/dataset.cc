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

#include "bcompat/dataset.h"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "bcompat/error.h"
#include "bcompat/text_io.h"
#include "json.hpp"

namespace bcompat {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

Label ReadLabel(const Json& v) {
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kParseError, "labels must be integers");
  }
  return v.get<Label>();
}

}  // namespace

bool Instance::HasGroup(std::string_view tag) const {
  return std::find(groups.begin(), groups.end(), tag) != groups.end();
}

size_t Dataset::feature_dim() const {
  if (!instances.empty()) return instances.front().features.size();
  return feature_shape ? feature_shape->size() : 0;
}

bool Dataset::HasLabel(Label label) const {
  return std::find(label_set.begin(), label_set.end(), label) !=
         label_set.end();
}

void ValidateDataset(const Dataset& d) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (d.label_set.empty()) fail("dataset label_set is empty");
  const std::set<Label> labels(d.label_set.begin(), d.label_set.end());
  if (labels.size() != d.label_set.size()) {
    fail("dataset label_set has duplicates");
  }
  if (d.feature_shape && (d.feature_shape->height <= 0 ||
                          d.feature_shape->width <= 0 ||
                          d.feature_shape->channels <= 0)) {
    fail("feature_shape dimensions must be positive");
  }
  const size_t dim = d.feature_dim();
  if (d.feature_shape && d.feature_shape->size() != dim) {
    fail("feature_shape product " + std::to_string(d.feature_shape->size()) +
         " does not match feature length " + std::to_string(dim));
  }
  std::unordered_set<std::string> ids;
  for (const auto& inst : d.instances) {
    if (inst.features.size() != dim) {
      fail("instance '" + inst.id + "' has " +
           std::to_string(inst.features.size()) + " features, expected " +
           std::to_string(dim));
    }
    if (!labels.count(inst.label)) {
      fail("instance '" + inst.id + "' has label " +
           std::to_string(inst.label) + " outside the label set");
    }
    if (!ids.insert(inst.id).second) {
      fail("duplicate instance id '" + inst.id + "'");
    }
  }
}

Dataset ParseDataset(std::string_view text, const std::string& source) {
  Dataset d;
  const auto lines = SplitLines(text);
  bool have_header = false;
  for (size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (Trim(lines[i]).empty()) continue;
    try {
      const Json obj = Json::parse(lines[i]);
      if (!obj.is_object()) {
        throw Error(ErrorCode::kParseError, "expected a JSON object");
      }
      if (!have_header) {
        if (!obj.contains("label_set")) {
          throw Error(ErrorCode::kParseError,
                      "first line must be a header with 'label_set'");
        }
        for (const auto& l : obj.at("label_set")) {
          d.label_set.push_back(ReadLabel(l));
        }
        if (obj.contains("feature_shape") && !obj["feature_shape"].is_null()) {
          const auto& s = obj["feature_shape"];
          if (!s.is_array() || s.size() != 3) {
            throw Error(ErrorCode::kParseError,
                        "feature_shape must be [height, width, channels]");
          }
          d.feature_shape =
              FeatureShape{s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
        }
        have_header = true;
        continue;
      }
      Instance inst;
      if (!obj.contains("id") || !obj["id"].is_string()) {
        throw Error(ErrorCode::kParseError, "'id' must be a string");
      }
      inst.id = obj["id"].get<std::string>();
      if (!obj.contains("x") || !obj["x"].is_array()) {
        throw Error(ErrorCode::kParseError, "'x' must be a list of numbers");
      }
      inst.features.reserve(obj["x"].size());
      for (const auto& v : obj["x"]) {
        if (!v.is_number()) {
          throw Error(ErrorCode::kParseError, "'x' must hold numbers only");
        }
        inst.features.push_back(v.get<double>());
      }
      if (!obj.contains("y")) throw Error(ErrorCode::kParseError, "missing 'y'");
      inst.label = ReadLabel(obj["y"]);
      if (obj.contains("groups") && !obj["groups"].is_null()) {
        for (const auto& g : obj["groups"]) {
          inst.groups.push_back(g.get<std::string>());
        }
      }
      d.instances.push_back(std::move(inst));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.message());
    } catch (const Json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(source, 1, "missing header line");
  try {
    ValidateDataset(d);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.message());
  }
  return d;
}

Dataset LoadDataset(const std::string& path) {
  return ParseDataset(ReadFile(path), path);
}

std::string SerializeDataset(const Dataset& d) {
  std::string out;
  OrderedJson header;
  header["label_set"] = d.label_set;
  if (d.feature_shape) {
    header["feature_shape"] = {d.feature_shape->height, d.feature_shape->width,
                               d.feature_shape->channels};
  } else {
    header["feature_shape"] = nullptr;
  }
  out += header.dump();
  out += '\n';
  for (const auto& inst : d.instances) {
    OrderedJson obj;
    obj["id"] = inst.id;
    obj["x"] = inst.features;
    obj["y"] = inst.label;
    obj["groups"] =
        inst.groups.empty() ? OrderedJson() : OrderedJson(inst.groups);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void SaveDataset(const std::string& path, const Dataset& d) {
  WriteFile(path, SerializeDataset(d));
}

Dataset TakePerClass(const Dataset& d, size_t per_class) {
  Dataset out;
  out.label_set = d.label_set;
  out.feature_shape = d.feature_shape;
  std::map<Label, size_t> taken;
  for (const auto& inst : d.instances) {
    if (taken[inst.label] < per_class) {
      ++taken[inst.label];
      out.instances.push_back(inst);
    }
  }
  return out;
}

}  // namespace bcompat
