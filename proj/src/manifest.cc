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

#include "bcompat/manifest.h"

#include <openssl/evp.h>

#include <fmt/format.h>

#include "bcompat/error.h"
#include "bcompat/text_io.h"
#include "json.hpp"

namespace bcompat {

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string FileSha256(const std::string& path) {
  return Sha256Hex(ReadFile(path));
}

void RunManifest::AddInput(const std::string& path) {
  inputs.emplace_back(path, FileSha256(path));
}

std::string SerializeManifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "bcompat";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["status"] = m.status;
  if (!m.error.empty()) j["error"] = m.error;
  j["config"] = nlohmann::ordered_json::parse(m.config_json);
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : m.inputs) {
    j["inputs"].push_back({{"path", path}, {"sha256", digest}});
  }
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

void SaveManifest(const std::string& path, const RunManifest& manifest) {
  WriteFile(path, SerializeManifest(manifest));
}

}  // namespace bcompat
