// Copyright 2026 The Herdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HERDSIM_ERROR_H_
#define HERDSIM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace herdsim {

// Every failure the library reports is an Error carrying one of these codes.
enum class ErrorCode {
  kInvalidConfig,
  kNonConvergence,
  kNoEquilibrium,
  kEmptyInterval,
  kOverrideOutOfInterval,
  kIndexGap,
  kInconsistentRecord,
  kInvalidSpec,
  kParseFailed,
  kMalformedResponse,
  kOutOfRange,
  kTimeout,
  kTransportError,
  kServiceError,
  kInvalidKind,
  kEmptyInput,
  kIoError,
  kInvalidPlan,
  kUnknownSession,
  kSeatTaken,
  kUnauthorized,
  kWrongState,
  kDuplicateMove,
  kSessionFinished,
  kMalformedTranscript,
};

// Stable snake_case identifier, used on the wire and in transcripts.
std::string_view ErrorCodeName(ErrorCode code);
// Inverse of ErrorCodeName; unknown names map to kServiceError.
ErrorCode ErrorCodeFromName(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace herdsim

#endif  // HERDSIM_ERROR_H_
