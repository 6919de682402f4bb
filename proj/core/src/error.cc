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

#include "herdsim/error.h"

namespace herdsim {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kNonConvergence: return "non_convergence";
    case ErrorCode::kNoEquilibrium: return "no_equilibrium";
    case ErrorCode::kEmptyInterval: return "empty_interval";
    case ErrorCode::kOverrideOutOfInterval: return "override_out_of_interval";
    case ErrorCode::kIndexGap: return "index_gap";
    case ErrorCode::kInconsistentRecord: return "inconsistent_record";
    case ErrorCode::kInvalidSpec: return "invalid_spec";
    case ErrorCode::kParseFailed: return "parse_failed";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kTransportError: return "transport_error";
    case ErrorCode::kServiceError: return "service_error";
    case ErrorCode::kInvalidKind: return "invalid_kind";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kInvalidPlan: return "invalid_plan";
    case ErrorCode::kUnknownSession: return "unknown_session";
    case ErrorCode::kSeatTaken: return "seat_taken";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kWrongState: return "wrong_state";
    case ErrorCode::kDuplicateMove: return "duplicate_move";
    case ErrorCode::kSessionFinished: return "session_finished";
    case ErrorCode::kMalformedTranscript: return "malformed_transcript";
  }
  return "unknown";
}

ErrorCode ErrorCodeFromName(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kMalformedTranscript); ++c) {
    auto code = static_cast<ErrorCode>(c);
    if (ErrorCodeName(code) == name) return code;
  }
  return ErrorCode::kServiceError;
}

}  // namespace herdsim
