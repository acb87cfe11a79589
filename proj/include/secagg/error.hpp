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

#ifndef SECAGG_ERROR_HPP_
#define SECAGG_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace secagg {

// Codes double as the 2-byte code carried by ERROR frames.
enum class ErrorCode : std::uint16_t {
  kInvalidArgument = 1,
  kOutOfRange = 2,
  kKeyMismatch = 3,
  kLengthMismatch = 4,
  kMalformedFrame = 5,
  kAuthFailed = 6,
  kBadState = 7,
  kWrongRound = 8,
  kWrongSender = 9,
  kOutOfOrder = 10,
  kDuplicate = 11,
  kRedFlag = 12,
  kDivergentSubmission = 13,
  kMissingChunk = 14,
  kStaleEpoch = 15,
  kTopology = 16,
  kIo = 17,
  kTimeout = 18,
  kAborted = 19,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace secagg

#endif  // SECAGG_ERROR_HPP_
