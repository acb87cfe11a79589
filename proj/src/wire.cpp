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

#include "secagg/wire.hpp"

#include <algorithm>
#include <cctype>

namespace secagg {
namespace {

void write_participant(ByteWriter& w, const Participant& p) {
  w.str16(p.name);
  w.u8(p.location_tag.has_value() ? 1 : 0);
  w.str16(p.location_tag.value_or(""));
  w.str16(p.endpoint);
}

Participant read_participant(ByteReader& r) {
  Participant p;
  p.name = r.str16();
  bool has_tag = r.u8() != 0;
  std::string tag = r.str16();
  if (has_tag) p.location_tag = std::move(tag);
  p.endpoint = r.str16();
  return p;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> parse_hex(std::string_view hex) {
  if (hex.size() != 2 * N) return std::nullopt;
  std::array<std::uint8_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    int hi = hex_value(hex[2 * i]), lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void write_aggregate(ByteWriter& w, const AggregateMessage& m,
                     const PublicKey& pk) {
  w.u32(m.round);
  w.u16(m.sender_rank);
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.u16(m.chunk_index);
  w.u16(m.step);
  w.u32(static_cast<std::uint32_t>(m.ciphertexts.size()));
  w.raw(serialize_ciphertexts(pk, m.ciphertexts));
}

AggregateMessage read_aggregate_header(ByteReader& r) {
  AggregateMessage m;
  m.round = r.u32();
  m.sender_rank = r.u16();
  std::uint8_t kind = r.u8();
  if (kind > 1) throw Error(ErrorCode::kMalformedFrame, "unknown payload kind");
  m.kind = static_cast<PayloadKind>(kind);
  m.chunk_index = r.u16();
  m.step = r.u16();
  return m;
}

AggregateMessage read_aggregate(ByteReader& r, const PublicKey& pk) {
  AggregateMessage m = read_aggregate_header(r);
  std::uint32_t count = r.u32();
  const std::size_t width = pk.ciphertext_bytes();
  if (r.remaining() != static_cast<std::size_t>(count) * width) {
    throw Error(ErrorCode::kLengthMismatch,
                "ciphertext count does not match payload size");
  }
  m.ciphertexts = deserialize_ciphertexts(pk, r.raw(r.remaining()), count);
  return m;
}

}  // namespace

const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::kRegister: return "REGISTER";
    case MessageType::kTopologyAssign: return "TOPOLOGY_ASSIGN";
    case MessageType::kPubkey: return "PUBKEY";
    case MessageType::kAggMsg: return "AGG_MSG";
    case MessageType::kAggSubmit: return "AGG_SUBMIT";
    case MessageType::kResult: return "RESULT";
    case MessageType::kHeartbeat: return "HEARTBEAT";
    case MessageType::kPause: return "PAUSE";
    case MessageType::kResume: return "RESUME";
    case MessageType::kError: return "ERROR";
  }
  return "UNKNOWN";
}

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::kRing: return "ring";
    case Protocol::kBroadcast: return "broadcast";
    case Protocol::kAllReduce: return "allreduce";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  lower.erase(std::remove(lower.begin(), lower.end(), '-'), lower.end());
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  if (lower == "ring") return Protocol::kRing;
  if (lower == "broadcast") return Protocol::kBroadcast;
  if (lower == "allreduce") return Protocol::kAllReduce;
  throw Error(ErrorCode::kInvalidArgument, "unknown protocol '" + std::string(s) + "'");
}

Bytes encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxPayloadBytes) {
    throw Error(ErrorCode::kOutOfRange, "frame payload too large");
  }
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(f.payload.size()));
  w.u8(static_cast<std::uint8_t>(f.type));
  w.raw(f.job_id);
  w.raw(f.token);
  w.raw(f.payload);
  return w.take();
}

namespace {

Frame decode_header(ByteReader& r, std::uint32_t* payload_length) {
  Frame f;
  *payload_length = r.u32();
  if (*payload_length > kMaxPayloadBytes) {
    throw Error(ErrorCode::kMalformedFrame, "frame payload too large");
  }
  std::uint8_t type = r.u8();
  if (type < 0x01 || type > 0x0A) {
    throw Error(ErrorCode::kMalformedFrame, "unknown message type " + std::to_string(type));
  }
  f.type = static_cast<MessageType>(type);
  ByteView id = r.raw(f.job_id.size());
  std::copy(id.begin(), id.end(), f.job_id.begin());
  ByteView tok = r.raw(f.token.size());
  std::copy(tok.begin(), tok.end(), f.token.begin());
  return f;
}

}  // namespace

Frame decode_frame(ByteView bytes) {
  ByteReader r(bytes);
  std::uint32_t len = 0;
  Frame f = decode_header(r, &len);
  if (r.remaining() != len) {
    throw Error(ErrorCode::kMalformedFrame, "frame length does not match buffer");
  }
  ByteView payload = r.raw(len);
  f.payload.assign(payload.begin(), payload.end());
  return f;
}

void FrameReader::feed(ByteView bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameReader::next() {
  if (buf_.size() < kFrameHeaderBytes) return std::nullopt;
  Bytes header(buf_.begin(), buf_.begin() + kFrameHeaderBytes);
  ByteReader r(header);
  std::uint32_t len = 0;
  Frame f = decode_header(r, &len);
  if (buf_.size() < kFrameHeaderBytes + len) return std::nullopt;
  auto start = buf_.begin() + kFrameHeaderBytes;
  f.payload.assign(start, start + len);
  buf_.erase(buf_.begin(), start + len);
  return f;
}

JobId job_id_from_string(std::string_view s) {
  if (auto parsed = parse_hex<16>(s)) return *parsed;
  auto digest = sha256(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  JobId id;
  std::copy_n(digest.begin(), id.size(), id.begin());
  return id;
}

std::string job_id_to_string(const JobId& id) { return to_hex(id); }

AuthToken token_from_hex(std::string_view hex) {
  auto parsed = parse_hex<32>(hex);
  if (!parsed) {
    throw Error(ErrorCode::kInvalidArgument, "token must be 64 hex characters");
  }
  return *parsed;
}

TokenDigest token_digest(const AuthToken& token) { return sha256(token); }

Bytes encode(const RegisterPayload& p) {
  ByteWriter w;
  write_participant(w, p.participant);
  return w.take();
}

RegisterPayload decode_register(ByteView payload) {
  ByteReader r(payload);
  RegisterPayload p{read_participant(r)};
  r.expect_end();
  return p;
}

Bytes encode(const TopologyAssignPayload& p) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(p.protocol));
  w.u8(static_cast<std::uint8_t>(p.strategy));
  w.u16(static_cast<std::uint16_t>(p.members.size()));
  w.u16(p.your_rank);
  w.u8(static_cast<std::uint8_t>(p.codec.scale_bits));
  w.u16(static_cast<std::uint16_t>(p.codec.max_parties));
  w.f64(p.codec.magnitude_bound);
  w.u32(p.total_rounds);
  for (const TopologyMember& m : p.members) {
    write_participant(w, m.participant);
    w.raw(m.token_digest);
  }
  return w.take();
}

TopologyAssignPayload decode_topology_assign(ByteView payload) {
  ByteReader r(payload);
  TopologyAssignPayload p;
  std::uint8_t protocol = r.u8();
  if (protocol > 2) throw Error(ErrorCode::kMalformedFrame, "unknown protocol");
  p.protocol = static_cast<Protocol>(protocol);
  std::uint8_t strategy = r.u8();
  if (strategy > 3) throw Error(ErrorCode::kMalformedFrame, "unknown ring strategy");
  p.strategy = static_cast<RingStrategy>(strategy);
  std::uint16_t parties = r.u16();
  p.your_rank = r.u16();
  p.codec.scale_bits = r.u8();
  p.codec.max_parties = r.u16();
  p.codec.magnitude_bound = r.f64();
  p.total_rounds = r.u32();
  for (std::uint16_t i = 0; i < parties; ++i) {
    TopologyMember m;
    m.participant = read_participant(r);
    ByteView digest = r.raw(m.token_digest.size());
    std::copy(digest.begin(), digest.end(), m.token_digest.begin());
    p.members.push_back(std::move(m));
  }
  r.expect_end();
  if (p.your_rank < 1 || p.your_rank > parties) {
    throw Error(ErrorCode::kMalformedFrame, "assigned rank outside ring");
  }
  return p;
}

Bytes encode(const PubkeyPayload& p) {
  ByteWriter w;
  w.u32(p.epoch);
  w.raw(p.public_key);
  return w.take();
}

PubkeyPayload decode_pubkey(ByteView payload) {
  ByteReader r(payload);
  PubkeyPayload p;
  p.epoch = r.u32();
  ByteView rest = r.raw(r.remaining());
  p.public_key.assign(rest.begin(), rest.end());
  PublicKey::deserialize(p.public_key);  // validates
  return p;
}

Bytes encode(const AggregateMessage& m, const PublicKey& pk) {
  ByteWriter w;
  write_aggregate(w, m, pk);
  return w.take();
}

AggregateMessage decode_aggregate(ByteView payload, const PublicKey& pk) {
  ByteReader r(payload);
  return read_aggregate(r, pk);
}

AggregateMessage peek_aggregate_header(ByteView payload) {
  ByteReader r(payload);
  return read_aggregate_header(r);
}

Bytes encode(const AggregateSubmission& s, const PublicKey& pk) {
  ByteWriter w;
  w.raw(s.key);
  write_aggregate(w, s.message, pk);
  return w.take();
}

KeyFingerprint peek_submission_key(ByteView payload) {
  ByteReader r(payload);
  ByteView key = r.raw(8);
  KeyFingerprint fp;
  std::copy(key.begin(), key.end(), fp.begin());
  return fp;
}

AggregateSubmission decode_submission(ByteView payload, const PublicKey& pk) {
  ByteReader r(payload);
  AggregateSubmission s;
  ByteView key = r.raw(s.key.size());
  std::copy(key.begin(), key.end(), s.key.begin());
  if (s.key != pk.fingerprint()) {
    throw Error(ErrorCode::kKeyMismatch, "submission encrypted under another key");
  }
  s.message = read_aggregate(r, pk);
  return s;
}

Bytes encode(const ResultPayload& p) {
  ByteWriter w;
  w.u32(p.round);
  w.u32(p.training_round);
  w.u32(static_cast<std::uint32_t>(p.average.size()));
  for (double v : p.average) w.f64(v);
  return w.take();
}

ResultPayload decode_result(ByteView payload) {
  ByteReader r(payload);
  ResultPayload p;
  p.round = r.u32();
  p.training_round = r.u32();
  std::uint32_t count = r.u32();
  if (r.remaining() != static_cast<std::size_t>(count) * 8) {
    throw Error(ErrorCode::kLengthMismatch, "result count does not match payload");
  }
  p.average.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) p.average.push_back(r.f64());
  return p;
}

Bytes encode(const HeartbeatPayload& p) {
  ByteWriter w;
  w.u64(p.sequence);
  return w.take();
}

HeartbeatPayload decode_heartbeat(ByteView payload) {
  ByteReader r(payload);
  HeartbeatPayload p{r.u64()};
  r.expect_end();
  return p;
}

Bytes encode(const PausePayload& p) {
  ByteWriter w;
  w.u32(p.round);
  w.str16(p.reason);
  return w.take();
}

PausePayload decode_pause(ByteView payload) {
  ByteReader r(payload);
  PausePayload p;
  p.round = r.u32();
  p.reason = r.str16();
  r.expect_end();
  return p;
}

Bytes encode(const ResumePayload& p) {
  ByteWriter w;
  w.u32(p.round);
  w.u32(p.training_round);
  w.u32(p.epoch);
  return w.take();
}

ResumePayload decode_resume(ByteView payload) {
  ByteReader r(payload);
  ResumePayload p;
  p.round = r.u32();
  p.training_round = r.u32();
  p.epoch = r.u32();
  r.expect_end();
  return p;
}

Bytes encode(const ErrorPayload& p) {
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(p.code));
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(p.detail.data()),
                 p.detail.size()));
  return w.take();
}

ErrorPayload decode_error(ByteView payload) {
  ByteReader r(payload);
  ErrorPayload p;
  p.code = static_cast<ErrorCode>(r.u16());
  ByteView rest = r.raw(r.remaining());
  p.detail.assign(rest.begin(), rest.end());
  return p;
}

}  // namespace secagg
