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

// Per-learner round state machines for the three aggregation protocols.
//
// A session is created for one (round, learner) pair. start() and
// on_message() return the messages the learner must send next; the caller
// owns transport, timers and the pause/resume handshake. Sessions process one
// message at a time and are not thread-safe.

#ifndef SECAGG_PROTOCOL_HPP_
#define SECAGG_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secagg/codec.hpp"
#include "secagg/paillier.hpp"
#include "secagg/random.hpp"
#include "secagg/topology.hpp"
#include "secagg/wire.hpp"

namespace secagg {

enum class Phase : std::uint8_t {
  kIdle,
  kAggregating,
  kAwaitingDecryption,
  kPaused,
  kDone,
  kFailed,
};

const char* to_string(Phase p);

// Phase bookkeeping for one round. Legal moves:
//   Idle -> Aggregating -> AwaitingDecryption -> Done
//   Aggregating <-> Paused, and any non-terminal phase -> Failed.
class RoundState {
 public:
  RoundState(JobId job_id, std::uint32_t round, Protocol protocol)
      : job_id_(job_id), round_(round), protocol_(protocol) {}

  const JobId& job_id() const { return job_id_; }
  std::uint32_t round() const { return round_; }
  Protocol protocol() const { return protocol_; }
  Phase phase() const { return phase_; }

  static bool allowed(Phase from, Phase to);
  // Throws kBadState on an illegal move.
  void transition(Phase to);

  // Senders (by rank) and chunks already received this round.
  std::set<std::size_t> received_from;
  std::set<std::pair<std::size_t, std::size_t>> received_chunks;  // (step, chunk)

 private:
  JobId job_id_;
  std::uint32_t round_;
  Protocol protocol_;
  Phase phase_ = Phase::kIdle;
};

// Rank 0 addresses the coordinator's decryptor.
inline constexpr std::size_t kDecryptorRank = 0;

struct Outbound {
  std::size_t to_rank = kDecryptorRank;
  AggregateMessage message;
};

// How a learner contributes. Honest learners add a fresh encryption of their
// own vector. The other settings exist to simulate colluders.
struct Contribution {
  bool add_own = true;
  // When set, the learner encrypts a zero vector with randomness drawn from
  // this seed (and the round number), so every holder emits identical bytes.
  std::optional<Seed> shared_nonce_seed;
};

struct RoundContext {
  JobId job_id{};
  std::uint32_t round = 0;
  std::size_t rank = 0;
  std::size_t parties = 0;
  Protocol protocol = Protocol::kRing;
};

class RoundSession {
 public:
  virtual ~RoundSession() = default;

  // Encrypts the learner's contribution and returns the opening sends.
  virtual std::vector<Outbound> start() = 0;
  // Throws Error and moves to Failed on any protocol violation.
  virtual std::vector<Outbound> on_message(const AggregateMessage& msg) = 0;

  void pause();
  void resume();
  // Decrypted result for this round arrived.
  void complete();
  void fail();

  const RoundState& state() const { return state_; }
  Phase phase() const { return state_.phase(); }
  const RoundContext& context() const { return ctx_; }
  std::size_t vector_length() const { return own_.size(); }

 protected:
  RoundSession(RoundContext ctx, PublicKey pk, EncodedVector own,
               RandomSource& rng, Contribution contribution);

  // Fresh encryption of the slice [offset, offset + size) of this learner's
  // contribution (own vector, or zeros for colluders).
  CiphertextVector encrypt_range(std::size_t offset, std::size_t size);
  void check_inbound(const AggregateMessage& msg, PayloadKind kind,
                     std::size_t expected_sender, std::size_t expected_length);
  [[noreturn]] void fail_with(ErrorCode code, const std::string& what);

  RoundContext ctx_;
  PublicKey pk_;
  EncodedVector own_;
  RandomSource& rng_;
  Contribution contribution_;
  RoundState state_;

 private:
  std::unique_ptr<SeededRandom> shared_rng_;
};

// Basic ring: rank 1 starts, every hop adds its own encryption, rank P hands
// the total to the decryptor.
class RingSession final : public RoundSession {
 public:
  RingSession(RoundContext ctx, PublicKey pk, EncodedVector own,
              RandomSource& rng, Contribution contribution = {});

  std::vector<Outbound> start() override;
  std::vector<Outbound> on_message(const AggregateMessage& msg) override;

 private:
  CiphertextVector own_cipher_;
};

// Byte-identical ciphertext vectors from two or more distinct senders.
struct DuplicateReport {
  std::vector<std::vector<std::size_t>> groups;  // sorted ranks per group

  bool flagged() const { return !groups.empty(); }
  std::vector<std::size_t> ranks() const;
  std::string describe() const;
};

DuplicateReport detect_duplicates(
    const std::map<std::size_t, CiphertextVector>& received,
    const PublicKey& pk);

// Every learner broadcasts its encrypted vector, sums all P vectors and
// submits the sum; the decryptor cross-checks the P submissions.
class BroadcastSession final : public RoundSession {
 public:
  BroadcastSession(RoundContext ctx, PublicKey pk, EncodedVector own,
                   RandomSource& rng, Contribution contribution = {});

  std::vector<Outbound> start() override;
  std::vector<Outbound> on_message(const AggregateMessage& msg) override;

  // Set once a red flag fired.
  const std::optional<DuplicateReport>& red_flag() const { return red_flag_; }

 private:
  CiphertextVector own_cipher_;
  std::map<std::size_t, CiphertextVector> received_;
  std::optional<DuplicateReport> red_flag_;
};

// Ring all-reduce over P chunks: P - 1 pipelined steps, then each rank submits
// the one chunk it holds fully aggregated.
class AllReduceSession final : public RoundSession {
 public:
  AllReduceSession(RoundContext ctx, PublicKey pk, EncodedVector own,
                   RandomSource& rng, Contribution contribution = {});

  std::vector<Outbound> start() override;
  std::vector<Outbound> on_message(const AggregateMessage& msg) override;

  const AllReduceSchedule& schedule() const { return schedule_; }
  std::size_t chunk_messages_sent() const { return chunk_messages_sent_; }

 private:
  AllReduceSchedule schedule_;
  std::vector<CiphertextVector> own_chunks_;  // by chunk index - 1
  std::size_t next_step_ = 1;                 // step expected next inbound
  std::size_t chunk_messages_sent_ = 0;
};

std::unique_ptr<RoundSession> make_session(const RoundContext& ctx,
                                           const PublicKey& pk,
                                           EncodedVector own, RandomSource& rng,
                                           Contribution contribution = {});

}  // namespace secagg

#endif  // SECAGG_PROTOCOL_HPP_
