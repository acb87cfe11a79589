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

// Length-prefixed binary frames exchanged between coordinator and learners.
//
//   frame   = u32 payload_length | u8 type | 16B job_id | 32B token | payload
//
// All integers are big-endian. Payload layouts are defined next to each
// struct below; AGG_MSG follows the fixed aggregate-message layout and the
// other payloads are documented in README.md.

#ifndef SECAGG_WIRE_HPP_
#define SECAGG_WIRE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/codec.hpp"
#include "secagg/error.hpp"
#include "secagg/paillier.hpp"
#include "secagg/topology.hpp"

namespace secagg {

using JobId = std::array<std::uint8_t, 16>;
using AuthToken = std::array<std::uint8_t, 32>;
using TokenDigest = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kFrameHeaderBytes = 4 + 1 + 16 + 32;
inline constexpr std::uint32_t kMaxPayloadBytes = 1u << 30;

enum class MessageType : std::uint8_t {
  kRegister = 0x01,
  kTopologyAssign = 0x02,
  kPubkey = 0x03,
  kAggMsg = 0x04,
  kAggSubmit = 0x05,
  kResult = 0x06,
  kHeartbeat = 0x07,
  kPause = 0x08,
  kResume = 0x09,
  kError = 0x0A,
};

const char* to_string(MessageType t);

enum class Protocol : std::uint8_t {
  kRing = 0,
  kBroadcast = 1,
  kAllReduce = 2,
};

const char* to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

struct Frame {
  MessageType type = MessageType::kHeartbeat;
  JobId job_id{};
  AuthToken token{};
  Bytes payload;
};

Bytes encode_frame(const Frame& f);
// Decodes exactly one frame occupying all of 'bytes'.
Frame decode_frame(ByteView bytes);

// Incremental decoder for a byte stream.
class FrameReader {
 public:
  void feed(ByteView bytes);
  // Next complete frame, if buffered. Throws on a malformed header.
  std::optional<Frame> next();
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::deque<std::uint8_t> buf_;
};

JobId job_id_from_string(std::string_view s);
std::string job_id_to_string(const JobId& id);
AuthToken token_from_hex(std::string_view hex);
TokenDigest token_digest(const AuthToken& token);

// REGISTER: str16 name | u8 has_tag | str16 tag | str16 endpoint
struct RegisterPayload {
  Participant participant;
};
Bytes encode(const RegisterPayload& p);
RegisterPayload decode_register(ByteView payload);

// TOPOLOGY_ASSIGN: u8 protocol | u8 strategy | u16 parties | u16 your_rank |
//   u8 scale_bits | u16 max_parties | f64 magnitude_bound | u32 total_rounds |
//   parties x (str16 name | u8 has_tag | str16 tag | str16 endpoint |
//   32B token digest), in rank order.
struct TopologyMember {
  Participant participant;
  TokenDigest token_digest{};
};
struct TopologyAssignPayload {
  Protocol protocol = Protocol::kRing;
  RingStrategy strategy = RingStrategy::kNameAscending;
  std::uint16_t your_rank = 0;
  CodecConfig codec;
  std::uint32_t total_rounds = 0;
  std::vector<TopologyMember> members;
};
Bytes encode(const TopologyAssignPayload& p);
TopologyAssignPayload decode_topology_assign(ByteView payload);

// PUBKEY: u32 epoch | u32 key_bits | ceil(key_bits/8) bytes of n
struct PubkeyPayload {
  std::uint32_t epoch = 0;
  Bytes public_key;  // PublicKey::serialize() form
};
Bytes encode(const PubkeyPayload& p);
PubkeyPayload decode_pubkey(ByteView payload);

enum class PayloadKind : std::uint8_t {
  kFullVector = 0,
  kChunk = 1,
};

// AGG_MSG: u32 round | u16 sender_rank | u8 payload_kind | u16 chunk_index |
//   u16 step | u32 count | count fixed-width ciphertexts
struct AggregateMessage {
  std::uint32_t round = 0;
  std::uint16_t sender_rank = 0;
  PayloadKind kind = PayloadKind::kFullVector;
  std::uint16_t chunk_index = 0;
  std::uint16_t step = 0;
  CiphertextVector ciphertexts;
};
inline constexpr std::size_t kAggregateHeaderBytes = 4 + 2 + 1 + 2 + 2 + 4;
Bytes encode(const AggregateMessage& m, const PublicKey& pk);
AggregateMessage decode_aggregate(ByteView payload, const PublicKey& pk);
// Header fields only; used to route frames before the key is known.
AggregateMessage peek_aggregate_header(ByteView payload);

// AGG_SUBMIT: 8B key fingerprint | AGG_MSG layout
struct AggregateSubmission {
  KeyFingerprint key{};
  AggregateMessage message;
};
Bytes encode(const AggregateSubmission& s, const PublicKey& pk);
KeyFingerprint peek_submission_key(ByteView payload);
AggregateSubmission decode_submission(ByteView payload, const PublicKey& pk);

// RESULT: u32 round | u32 training_round | u32 count | count x f64
struct ResultPayload {
  std::uint32_t round = 0;
  std::uint32_t training_round = 0;
  std::vector<double> average;
};
Bytes encode(const ResultPayload& p);
ResultPayload decode_result(ByteView payload);

// HEARTBEAT: u64 sequence
struct HeartbeatPayload {
  std::uint64_t sequence = 0;
};
Bytes encode(const HeartbeatPayload& p);
HeartbeatPayload decode_heartbeat(ByteView payload);

// PAUSE: u32 round | str16 reason
struct PausePayload {
  std::uint32_t round = 0;
  std::string reason;
};
Bytes encode(const PausePayload& p);
PausePayload decode_pause(ByteView payload);

// RESUME: u32 round | u32 training_round | u32 epoch. Starts (or restarts)
// aggregation for 'round' under the key of 'epoch'.
struct ResumePayload {
  std::uint32_t round = 0;
  std::uint32_t training_round = 0;
  std::uint32_t epoch = 0;
};
Bytes encode(const ResumePayload& p);
ResumePayload decode_resume(ByteView payload);

// ERROR: u16 code | UTF-8 detail (rest of payload)
struct ErrorPayload {
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string detail;
};
Bytes encode(const ErrorPayload& p);
ErrorPayload decode_error(ByteView payload);

}  // namespace secagg

#endif  // SECAGG_WIRE_HPP_
