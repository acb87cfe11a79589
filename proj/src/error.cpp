/*
 * Copyright 2026 The secagg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "secagg/error.hpp"

namespace secagg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kKeyMismatch: return "key_mismatch";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kMalformedFrame: return "malformed_frame";
    case ErrorCode::kAuthFailed: return "auth_failed";
    case ErrorCode::kBadState: return "bad_state";
    case ErrorCode::kWrongRound: return "wrong_round";
    case ErrorCode::kWrongSender: return "wrong_sender";
    case ErrorCode::kOutOfOrder: return "out_of_order";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kRedFlag: return "red_flag";
    case ErrorCode::kDivergentSubmission: return "divergent_submission";
    case ErrorCode::kMissingChunk: return "missing_chunk";
    case ErrorCode::kStaleEpoch: return "stale_epoch";
    case ErrorCode::kTopology: return "topology";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kAborted: return "aborted";
  }
  return "unknown";
}

}  // namespace secagg
