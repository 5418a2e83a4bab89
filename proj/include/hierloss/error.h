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
#ifndef HIERLOSS_ERROR_H_
#define HIERLOSS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hierloss {

enum class ErrorCode {
  kIo,
  kParse,
  kValidation,
  kLevelOutOfRange,
  kIndexOutOfRange,
  kLevelMismatch,
  kNotADistribution,
  kInvalidProbability,
  kChildrenCountExceedsLimit,
  kWeightLengthMismatch,
  kNonPositiveAlpha,
  kSchemeDepthMismatch,
  kEmptyInput,
  kKOutOfRange,
  kEmptyGroundTruth,
  kDataMismatch,
  kDataFormat,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hierloss

#endif  // HIERLOSS_ERROR_H_
