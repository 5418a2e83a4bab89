// Copyright 2026 The hierloss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "hierloss/error.h"

namespace hierloss {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kLevelMismatch: return "LevelMismatch";
    case ErrorCode::kNotADistribution: return "NotADistribution";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kChildrenCountExceedsLimit:
      return "ChildrenCountExceedsLimit";
    case ErrorCode::kWeightLengthMismatch: return "WeightLengthMismatch";
    case ErrorCode::kNonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::kSchemeDepthMismatch: return "SchemeDepthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kKOutOfRange: return "KOutOfRange";
    case ErrorCode::kEmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::kDataMismatch: return "DataMismatch";
    case ErrorCode::kDataFormat: return "DataFormatError";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace hierloss
