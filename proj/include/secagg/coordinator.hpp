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

// Coordinator service: membership, ring/rank distribution, per-job Paillier
// key lifecycle, aggregate decryption and failure detection.
//
// Every job's state changes under that job's mutex. Timers and frames for a
// job arrive through the Transport, so in simulation everything runs on the
// virtual clock.

#ifndef SECAGG_COORDINATOR_HPP_
#define SECAGG_COORDINATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secagg/codec.hpp"
#include "secagg/paillier.hpp"
#include "secagg/protocol.hpp"
#include "secagg/topology.hpp"
#include "secagg/transport.hpp"
#include "secagg/wire.hpp"

namespace secagg {

struct RotationPolicy {
  enum class Kind : std::uint8_t { kPerJob, kPerEpoch, kEveryHMinutes };

  Kind kind = Kind::kPerJob;
  // kPerEpoch: training rounds per epoch.
  std::uint32_t rounds_per_epoch = 1;
  // kEveryHMinutes.
  double minutes = 60.0;
};

struct HeartbeatConfig {
  double interval_s = 1.0;
  std::uint32_t max_missed = 3;
  double grace_s = 10.0;
};

struct JobConfig {
  JobId job_id{};
  std::uint32_t expected_members = 0;
  Protocol protocol = Protocol::kRing;
  RingStrategy strategy = RingStrategy::kNameAscending;
  unsigned key_bits = 2048;
  CodecConfig codec;
  std::uint32_t total_rounds = 1;
  RotationPolicy rotation;
  HeartbeatConfig heartbeat;
  // Pre-shared token per participant name.
  std::map<std::string, AuthToken> tokens;
  // Gradient length; 0 accepts whatever length the learners submit.
  std::size_t vector_length = 0;
  // Deterministic key generation (tests and simulation only).
  std::optional<Seed> key_seed;
};

// Seed of the key pair for 'epoch' when JobConfig::key_seed is set.
Seed epoch_key_seed(const Seed& job_seed, std::uint32_t epoch);

enum class JobStatus : std::uint8_t { kForming, kRunning, kPaused, kCompleted, kAborted };

const char* to_string(JobStatus s);

// Snapshot of a job; never carries the private key.
struct JobState {
  JobId job_id{};
  std::uint32_t expected_members = 0;
  std::vector<Participant> registered;
  Protocol protocol = Protocol::kRing;
  std::optional<RingTopology> topology;
  std::uint32_t key_epoch = 0;
  std::optional<PublicKey> public_key;
  RotationPolicy rotation_policy;
  JobStatus status = JobStatus::kForming;
  std::uint32_t current_round = 0;           // wire round id
  std::uint32_t current_training_round = 0;  // 1-based
  std::uint32_t completed_rounds = 0;
  std::string abort_reason;
};

enum class JobEventKind : std::uint8_t {
  kRegistered,
  kRejected,
  kStarted,
  kKeyRotated,
  kRoundStarted,
  kRoundCompleted,
  kRoundFailed,
  kMemberFailed,
  kPaused,
  kReconnected,
  kResumed,
  kEliminated,
  kRebuilt,
  kRedFlag,
  kStaleEpoch,
  kLearnerStalled,
  kAuthFailed,
  kAborted,
  kCompleted,
};

const char* to_string(JobEventKind k);

struct JobEvent {
  double time = 0;
  JobEventKind kind = JobEventKind::kRegistered;
  std::string detail;
  std::vector<std::size_t> ranks;
};

// One decryption performed by the decryptor.
struct DecryptRecord {
  std::uint32_t round = 0;
  Protocol protocol = Protocol::kRing;
  std::size_t parties = 0;
  // Ranks whose submissions formed the decrypted aggregate.
  std::set<std::size_t> submitters;
  std::size_t elements = 0;
};

// Coordinator-side timing of one completed round.
struct RoundRecord {
  std::uint32_t round = 0;
  std::uint32_t training_round = 0;
  Protocol protocol = Protocol::kRing;
  std::size_t parties = 0;
  std::uint32_t epoch = 0;
  double start_time = 0;        // RESUME sent
  double submitted_time = 0;    // last needed submission arrived
  double decrypt_cpu_s = 0;
  double result_sent_time = 0;
  std::vector<double> average;
};

// Assembles decryptor input for one round and enforces that only full
// aggregates are accepted: the rank-P vector for ring, P identical sums for
// broadcast, and one final chunk from every rank for all-reduce.
class SubmissionCollector {
 public:
  SubmissionCollector(Protocol protocol, std::size_t parties,
                      std::size_t vector_length, std::uint32_t round);

  // Returns true when the aggregate is complete. Throws on violations;
  // kDivergentSubmission leaves divergent_ranks() populated.
  bool add(const AggregateMessage& msg, const PublicKey& pk);
  bool complete() const { return complete_; }
  const CiphertextVector& aggregate() const { return aggregate_; }
  std::set<std::size_t> submitters() const;
  const std::vector<std::size_t>& divergent_ranks() const { return divergent_; }

 private:
  Protocol protocol_;
  std::size_t parties_;
  std::size_t vector_length_;
  std::uint32_t round_;
  std::optional<AllReduceSchedule> schedule_;
  std::map<std::size_t, AggregateMessage> by_rank_;
  CiphertextVector aggregate_;
  std::vector<std::size_t> divergent_;
  bool complete_ = false;
};

// Credential learners put in peer-to-peer frames (never the coordinator token).
AuthToken peer_credential(const AuthToken& token);

class Coordinator final : public FrameHandler {
 public:
  explicit Coordinator(Transport& transport);
  ~Coordinator() override;

  Coordinator(const Coordinator&) = delete;
  Coordinator& operator=(const Coordinator&) = delete;

  // Validates the codec against key_bits and expected_members >= 2.
  void create_job(JobConfig config);

  void on_frame(ByteView frame) override;

  struct RegisterOutcome {
    bool accepted = false;
    bool job_started = false;
    ErrorCode error = ErrorCode::kInvalidArgument;
    std::string detail;
  };
  // Records the participant; the last expected registration builds the ring,
  // generates the key pair and starts round 1.
  RegisterOutcome register_participant(const JobId& job,
                                       const Participant& participant,
                                       const AuthToken& token);

  // New key pair and epoch + 1. The round in flight keeps its own epoch.
  std::uint32_t rotate_keys(const JobId& job);

  JobState state(const JobId& job) const;
  std::vector<JobEvent> events(const JobId& job) const;
  std::vector<RoundRecord> round_records(const JobId& job) const;
  std::vector<DecryptRecord> decrypt_audit(const JobId& job) const;

 private:
  struct Job;
  struct Member;

  Job& job_ref(const JobId& id) const;
  void handle_frame(Job& job, const Frame& frame);
  RegisterOutcome register_locked(Job& job, const Participant& participant,
                                  const AuthToken& token);
  void start_job_locked(Job& job);
  void start_round_locked(Job& job, std::uint32_t training_round);
  void rotate_locked(Job& job);
  void on_submission_locked(Job& job, Member& member, const Frame& frame);
  void finish_round_locked(Job& job);
  void on_learner_error_locked(Job& job, Member& member, const ErrorPayload& err);
  void on_heartbeat_locked(Job& job, Member& member);
  void monitor_tick(const JobId& id);
  void grace_expired(const JobId& id, const std::string& name, std::uint64_t stamp);
  void abort_locked(Job& job, const std::string& reason);
  void send_topology_locked(Job& job);
  void send_to(Job& job, const Member& member, MessageType type, Bytes payload);
  void broadcast_locked(Job& job, MessageType type, const Bytes& payload,
                        bool include_failed = false);
  void add_event(Job& job, JobEventKind kind, std::string detail,
                 std::vector<std::size_t> ranks = {});

  Transport& transport_;
  mutable std::mutex jobs_mu_;
  std::map<JobId, std::unique_ptr<Job>> jobs_;
};

}  // namespace secagg

#endif  // SECAGG_COORDINATOR_HPP_
