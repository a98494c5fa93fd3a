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

#ifndef BCOMPAT_ERROR_H_
#define BCOMPAT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcompat {

// Every failure raised by the library carries one of these codes. All of them
// describe bad input or configuration; anything else escaping the library is
// an internal failure.
enum class ErrorCode {
  kInvalidArgument,
  kParseError,
  kIoError,
  kConfigError,
  // Prediction logs and comparisons.
  kLabelSetMismatch,
  kIdSetMismatch,
  kEmptyIntersection,
  kUnknownTagNamespace,
  kMissingConfidence,
  // Noise injection.
  kUnknownLabel,
  kIdenticalPair,
  kNoShape,
  kBadAreaFraction,
  kNotBinary,
  kUnknownGroup,
  // Training.
  kShapeMismatch,
  kEmptyDataset,
  kMissingReferenceModel,
  // Forgetting.
  kEmptyLog,
  kIdCoverageMismatch,
  // Experiments.
  kTestSetMismatch,
  kSubsetViolation,
  // Pipeline.
  kCharmapIncomplete,
  kUnknownCharacter,
  kEmptyWord,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // The message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// A parse failure tied to a 1-based line of an input file.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, const std::string& message)
      : Error(ErrorCode::kParseError,
              source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

}  // namespace bcompat

#endif  // BCOMPAT_ERROR_H_
