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

// Run manifests: a JSON record of what a command read, how it was
// configured and what it wrote.
//
// The manifest is written with status "incomplete" before any work starts
// and rewritten as "complete" or "failed" afterwards, so an interrupted run
// leaves a trace. It holds no timestamps, which keeps reruns byte-identical.

#ifndef BCOMPAT_MANIFEST_H_
#define BCOMPAT_MANIFEST_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bcompat {

inline constexpr const char* kToolVersion = "0.1.0";

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);
std::string FileSha256(const std::string& path);

struct RunManifest {
  std::string command;
  // Resolved configuration as a JSON document.
  std::string config_json = "{}";
  // (path, sha256) in the order the inputs were read.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::string> outputs;
  std::string status = "incomplete";
  std::string error;

  void AddInput(const std::string& path);
};

std::string SerializeManifest(const RunManifest& manifest);
void SaveManifest(const std::string& path, const RunManifest& manifest);

}  // namespace bcompat

#endif  // BCOMPAT_MANIFEST_H_
