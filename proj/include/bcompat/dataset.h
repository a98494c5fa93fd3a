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

// Labeled dense datasets.
//
// File format is JSON Lines: a header
//
//   {"label_set": [0, 1], "feature_shape": [12, 12, 1]}
//
// ("feature_shape" may be null) followed by one instance per line
//
//   {"id": "g-000001", "x": [0.0, 0.5, ...], "y": 1, "groups": null}
//
// Image-like features are stored height-major, then width, then channel:
// pixel (row, col, ch) lives at index (row * width + col) * channels + ch.

#ifndef BCOMPAT_DATASET_H_
#define BCOMPAT_DATASET_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcompat/prediction_log.h"

namespace bcompat {

struct FeatureShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  size_t size() const {
    return static_cast<size_t>(height) * static_cast<size_t>(width) *
           static_cast<size_t>(channels);
  }
  bool operator==(const FeatureShape&) const = default;
};

struct Instance {
  std::string id;
  std::vector<double> features;
  Label label = 0;
  std::vector<std::string> groups;

  bool HasGroup(std::string_view tag) const;
  bool operator==(const Instance&) const = default;
};

struct Dataset {
  std::vector<Instance> instances;
  std::vector<Label> label_set;
  std::optional<FeatureShape> feature_shape;

  size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
  // Length of the feature vectors; 0 for an empty dataset without a shape.
  size_t feature_dim() const;
  bool HasLabel(Label label) const;
  bool operator==(const Dataset&) const = default;
};

// Checks equal feature lengths, shape product, label membership, unique ids
// and a duplicate-free label set. Throws Error(kInvalidArgument).
void ValidateDataset(const Dataset& d);

Dataset ParseDataset(std::string_view text, const std::string& source);
Dataset LoadDataset(const std::string& path);
std::string SerializeDataset(const Dataset& d);
void SaveDataset(const std::string& path, const Dataset& d);

// Balanced deterministic subset: the first `per_class` instances of each
// label, in dataset order.
Dataset TakePerClass(const Dataset& d, size_t per_class);

}  // namespace bcompat

#endif  // BCOMPAT_DATASET_H_
