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

#include "bcompat/error.h"

namespace bcompat {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kLabelSetMismatch: return "LabelSetMismatch";
    case ErrorCode::kIdSetMismatch: return "IdSetMismatch";
    case ErrorCode::kEmptyIntersection: return "EmptyIntersection";
    case ErrorCode::kUnknownTagNamespace: return "UnknownTagNamespace";
    case ErrorCode::kMissingConfidence: return "MissingConfidence";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kIdenticalPair: return "IdenticalPair";
    case ErrorCode::kNoShape: return "NoShape";
    case ErrorCode::kBadAreaFraction: return "BadAreaFraction";
    case ErrorCode::kNotBinary: return "NotBinary";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMissingReferenceModel: return "MissingReferenceModel";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kIdCoverageMismatch: return "IdCoverageMismatch";
    case ErrorCode::kTestSetMismatch: return "TestSetMismatch";
    case ErrorCode::kSubsetViolation: return "SubsetViolation";
    case ErrorCode::kCharmapIncomplete: return "CharmapIncomplete";
    case ErrorCode::kUnknownCharacter: return "UnknownCharacter";
    case ErrorCode::kEmptyWord: return "EmptyWord";
  }
  return "Unknown";
}

}  // namespace bcompat
