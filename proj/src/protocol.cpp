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

#include "secagg/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace secagg {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::kIdle: return "idle";
    case Phase::kAggregating: return "aggregating";
    case Phase::kAwaitingDecryption: return "awaiting_decryption";
    case Phase::kPaused: return "paused";
    case Phase::kDone: return "done";
    case Phase::kFailed: return "failed";
  }
  return "unknown";
}

bool RoundState::allowed(Phase from, Phase to) {
  if (from == Phase::kDone || from == Phase::kFailed) return false;
  if (to == Phase::kFailed) return true;
  switch (from) {
    case Phase::kIdle: return to == Phase::kAggregating;
    case Phase::kAggregating:
      return to == Phase::kAwaitingDecryption || to == Phase::kPaused;
    case Phase::kPaused: return to == Phase::kAggregating;
    case Phase::kAwaitingDecryption: return to == Phase::kDone;
    default: return false;
  }
}

void RoundState::transition(Phase to) {
  if (!allowed(phase_, to)) {
    throw Error(ErrorCode::kBadState, std::string("illegal round transition ") +
                                          to_string(phase_) + " -> " + to_string(to));
  }
  phase_ = to;
}

RoundSession::RoundSession(RoundContext ctx, PublicKey pk, EncodedVector own,
                           RandomSource& rng, Contribution contribution)
    : ctx_(ctx),
      pk_(std::move(pk)),
      own_(std::move(own)),
      rng_(rng),
      contribution_(std::move(contribution)),
      state_(ctx.job_id, ctx.round, ctx.protocol) {
  if (ctx_.parties < 2) {
    throw Error(ErrorCode::kTopology, "aggregation needs at least two parties");
  }
  if (ctx_.rank < 1 || ctx_.rank > ctx_.parties) {
    throw Error(ErrorCode::kOutOfRange, "rank outside 1..P");
  }
  if (contribution_.shared_nonce_seed) {
    ByteWriter w;
    w.u32(ctx_.round);
    shared_rng_ = std::make_unique<SeededRandom>(
        derive_seed(*contribution_.shared_nonce_seed, to_hex(w.bytes())));
  }
}

void RoundSession::pause() { state_.transition(Phase::kPaused); }
void RoundSession::resume() { state_.transition(Phase::kAggregating); }
void RoundSession::complete() { state_.transition(Phase::kDone); }
void RoundSession::fail() {
  if (state_.phase() != Phase::kDone && state_.phase() != Phase::kFailed) {
    state_.transition(Phase::kFailed);
  }
}

void RoundSession::fail_with(ErrorCode code, const std::string& what) {
  fail();
  throw Error(code, what);
}

CiphertextVector RoundSession::encrypt_range(std::size_t offset,
                                             std::size_t size) {
  CiphertextVector out;
  out.reserve(size);
  static const mpz_class kZero = 0;
  for (std::size_t i = offset; i < offset + size; ++i) {
    if (shared_rng_) {
      out.push_back(encrypt(pk_, kZero, *shared_rng_));
    } else if (!contribution_.add_own) {
      out.push_back(encrypt(pk_, kZero, rng_));
    } else {
      out.push_back(encrypt(pk_, own_.elements[i], rng_));
    }
  }
  return out;
}

void RoundSession::check_inbound(const AggregateMessage& msg, PayloadKind kind,
                                 std::size_t expected_sender,
                                 std::size_t expected_length) {
  if (state_.phase() == Phase::kFailed || state_.phase() == Phase::kDone) {
    throw Error(ErrorCode::kBadState, "round already finished");
  }
  if (state_.phase() == Phase::kIdle) {
    throw Error(ErrorCode::kBadState, "message before the round started");
  }
  if (msg.round != ctx_.round) {
    fail_with(ErrorCode::kWrongRound, "message for round " + std::to_string(msg.round) +
                                          " during round " + std::to_string(ctx_.round));
  }
  if (msg.kind != kind) {
    fail_with(ErrorCode::kMalformedFrame, "unexpected payload kind");
  }
  if (expected_sender != 0 && msg.sender_rank != expected_sender) {
    fail_with(ErrorCode::kWrongSender, "expected rank " + std::to_string(expected_sender) +
                                           ", got rank " + std::to_string(msg.sender_rank));
  }
  if (msg.ciphertexts.size() != expected_length) {
    fail_with(ErrorCode::kLengthMismatch,
              "expected " + std::to_string(expected_length) + " ciphertexts, got " +
                  std::to_string(msg.ciphertexts.size()));
  }
  for (const Ciphertext& c : msg.ciphertexts) {
    if (c.key_fingerprint() != pk_.fingerprint()) {
      fail_with(ErrorCode::kKeyMismatch, "inbound ciphertext under a different key");
    }
  }
  if (state_.phase() == Phase::kPaused) state_.transition(Phase::kAggregating);
}

// ---------------------------------------------------------------------------

RingSession::RingSession(RoundContext ctx, PublicKey pk, EncodedVector own,
                         RandomSource& rng, Contribution contribution)
    : RoundSession(ctx, std::move(pk), std::move(own), rng,
                   std::move(contribution)) {}

std::vector<Outbound> RingSession::start() {
  state_.transition(Phase::kAggregating);
  own_cipher_ = encrypt_range(0, own_.size());
  if (ctx_.rank != 1) return {};
  AggregateMessage msg;
  msg.round = ctx_.round;
  msg.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
  msg.kind = PayloadKind::kFullVector;
  msg.ciphertexts = std::move(own_cipher_);
  state_.transition(Phase::kAwaitingDecryption);
  return {Outbound{2, std::move(msg)}};
}

std::vector<Outbound> RingSession::on_message(const AggregateMessage& msg) {
  if (ctx_.rank == 1) {
    fail_with(ErrorCode::kWrongSender, "rank 1 starts the ring and takes no inbound");
  }
  if (state_.phase() == Phase::kAwaitingDecryption) {
    fail_with(ErrorCode::kDuplicate, "second inbound vector in one ring round");
  }
  check_inbound(msg, PayloadKind::kFullVector, ctx_.rank - 1, own_.size());
  state_.received_from.insert(msg.sender_rank);

  AggregateMessage out;
  out.round = ctx_.round;
  out.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
  out.kind = PayloadKind::kFullVector;
  out.ciphertexts = contribution_.add_own || contribution_.shared_nonce_seed
                        ? add_vectors(pk_, msg.ciphertexts, own_cipher_)
                        : msg.ciphertexts;
  state_.transition(Phase::kAwaitingDecryption);
  std::size_t to = ctx_.rank == ctx_.parties ? kDecryptorRank : ctx_.rank + 1;
  return {Outbound{to, std::move(out)}};
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> DuplicateReport::ranks() const {
  std::vector<std::size_t> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string DuplicateReport::describe() const {
  std::ostringstream os;
  os << "identical ciphertext vectors from ranks ";
  bool first = true;
  for (std::size_t r : ranks()) {
    os << (first ? "" : ",") << r;
    first = false;
  }
  return os.str();
}

DuplicateReport detect_duplicates(
    const std::map<std::size_t, CiphertextVector>& received,
    const PublicKey& pk) {
  std::map<Bytes, std::vector<std::size_t>> by_bytes;
  for (const auto& [rank, vec] : received) {
    by_bytes[serialize_ciphertexts(pk, vec)].push_back(rank);
  }
  DuplicateReport report;
  for (auto& [bytes, ranks] : by_bytes) {
    if (ranks.size() > 1) report.groups.push_back(ranks);
  }
  std::sort(report.groups.begin(), report.groups.end());
  return report;
}

BroadcastSession::BroadcastSession(RoundContext ctx, PublicKey pk,
                                   EncodedVector own, RandomSource& rng,
                                   Contribution contribution)
    : RoundSession(ctx, std::move(pk), std::move(own), rng,
                   std::move(contribution)) {}

std::vector<Outbound> BroadcastSession::start() {
  state_.transition(Phase::kAggregating);
  own_cipher_ = encrypt_range(0, own_.size());
  std::vector<Outbound> out;
  for (std::size_t r = 1; r <= ctx_.parties; ++r) {
    if (r == ctx_.rank) continue;
    AggregateMessage msg;
    msg.round = ctx_.round;
    msg.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
    msg.kind = PayloadKind::kFullVector;
    msg.ciphertexts = own_cipher_;
    out.push_back(Outbound{r, std::move(msg)});
  }
  return out;
}

std::vector<Outbound> BroadcastSession::on_message(const AggregateMessage& msg) {
  if (msg.sender_rank == ctx_.rank || msg.sender_rank < 1 ||
      msg.sender_rank > ctx_.parties) {
    fail_with(ErrorCode::kWrongSender, "broadcast from invalid rank " +
                                           std::to_string(msg.sender_rank));
  }
  if (received_.count(msg.sender_rank) != 0) {
    fail_with(ErrorCode::kDuplicate, "second broadcast from rank " +
                                         std::to_string(msg.sender_rank));
  }
  if (state_.phase() == Phase::kAwaitingDecryption) {
    fail_with(ErrorCode::kBadState, "broadcast after sum was submitted");
  }
  check_inbound(msg, PayloadKind::kFullVector, 0, own_.size());
  state_.received_from.insert(msg.sender_rank);
  received_.emplace(msg.sender_rank, msg.ciphertexts);
  if (received_.size() < ctx_.parties - 1) return {};

  DuplicateReport report = detect_duplicates(received_, pk_);
  if (report.flagged()) {
    red_flag_ = report;
    fail_with(ErrorCode::kRedFlag, report.describe());
  }
  CiphertextVector sum = own_cipher_;
  for (const auto& [rank, vec] : received_) accumulate(pk_, sum, vec);

  AggregateMessage out;
  out.round = ctx_.round;
  out.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
  out.kind = PayloadKind::kFullVector;
  out.ciphertexts = std::move(sum);
  state_.transition(Phase::kAwaitingDecryption);
  return {Outbound{kDecryptorRank, std::move(out)}};
}

// ---------------------------------------------------------------------------

AllReduceSession::AllReduceSession(RoundContext ctx, PublicKey pk,
                                   EncodedVector own, RandomSource& rng,
                                   Contribution contribution)
    : RoundSession(ctx, std::move(pk), std::move(own), rng,
                   std::move(contribution)),
      schedule_(ctx.parties, own_.size()) {}

std::vector<Outbound> AllReduceSession::start() {
  state_.transition(Phase::kAggregating);
  own_chunks_.clear();
  for (const ChunkBounds& b : schedule_.chunks()) {
    own_chunks_.push_back(encrypt_range(b.offset, b.size));
  }
  std::size_t idx = schedule_.send_chunk(ctx_.rank, 1);
  AggregateMessage msg;
  msg.round = ctx_.round;
  msg.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
  msg.kind = PayloadKind::kChunk;
  msg.chunk_index = static_cast<std::uint16_t>(idx);
  msg.step = 1;
  msg.ciphertexts = own_chunks_[idx - 1];
  ++chunk_messages_sent_;
  return {Outbound{ctx_.rank % ctx_.parties + 1, std::move(msg)}};
}

std::vector<Outbound> AllReduceSession::on_message(const AggregateMessage& msg) {
  if (next_step_ > schedule_.steps()) {
    fail_with(ErrorCode::kOutOfOrder, "chunk after the final step");
  }
  const std::size_t predecessor = ctx_.rank == 1 ? ctx_.parties : ctx_.rank - 1;
  if (msg.kind == PayloadKind::kChunk && msg.step != next_step_) {
    fail_with(ErrorCode::kOutOfOrder, "chunk for step " + std::to_string(msg.step) +
                                          " while expecting step " +
                                          std::to_string(next_step_));
  }
  const std::size_t expected_idx = schedule_.receive_chunk(ctx_.rank, next_step_);
  if (msg.kind == PayloadKind::kChunk && msg.chunk_index != expected_idx) {
    fail_with(ErrorCode::kOutOfOrder, "chunk " + std::to_string(msg.chunk_index) +
                                          " arrived where chunk " +
                                          std::to_string(expected_idx) + " was due");
  }
  check_inbound(msg, PayloadKind::kChunk, predecessor,
                schedule_.bounds(expected_idx).size);
  state_.received_chunks.emplace(next_step_, expected_idx);
  state_.received_from.insert(msg.sender_rank);

  CiphertextVector acc = contribution_.add_own || contribution_.shared_nonce_seed
                             ? add_vectors(pk_, msg.ciphertexts,
                                           own_chunks_[expected_idx - 1])
                             : msg.ciphertexts;
  AggregateMessage out;
  out.round = ctx_.round;
  out.sender_rank = static_cast<std::uint16_t>(ctx_.rank);
  out.kind = PayloadKind::kChunk;
  out.chunk_index = static_cast<std::uint16_t>(expected_idx);
  out.ciphertexts = std::move(acc);

  if (next_step_ < schedule_.steps()) {
    ++next_step_;
    out.step = static_cast<std::uint16_t>(next_step_);
    ++chunk_messages_sent_;
    return {Outbound{ctx_.rank % ctx_.parties + 1, std::move(out)}};
  }
  // Last step: the accumulated chunk now holds every party's contribution.
  out.step = static_cast<std::uint16_t>(next_step_);
  ++next_step_;
  state_.transition(Phase::kAwaitingDecryption);
  return {Outbound{kDecryptorRank, std::move(out)}};
}

std::unique_ptr<RoundSession> make_session(const RoundContext& ctx,
                                           const PublicKey& pk,
                                           EncodedVector own, RandomSource& rng,
                                           Contribution contribution) {
  switch (ctx.protocol) {
    case Protocol::kRing:
      return std::make_unique<RingSession>(ctx, pk, std::move(own), rng,
                                           std::move(contribution));
    case Protocol::kBroadcast:
      return std::make_unique<BroadcastSession>(ctx, pk, std::move(own), rng,
                                                std::move(contribution));
    case Protocol::kAllReduce:
      return std::make_unique<AllReduceSession>(ctx, pk, std::move(own), rng,
                                                std::move(contribution));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown protocol");
}

}  // namespace secagg
