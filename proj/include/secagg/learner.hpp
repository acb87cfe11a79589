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

// Participant-side agent. A LearnerClient registers with the coordinator,
// turns each RESUME into a protocol session over its current gradient, and
// applies the averaged gradient that comes back in RESULT.

#ifndef SECAGG_LEARNER_HPP_
#define SECAGG_LEARNER_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/codec.hpp"
#include "secagg/paillier.hpp"
#include "secagg/protocol.hpp"
#include "secagg/random.hpp"
#include "secagg/topology.hpp"
#include "secagg/transport.hpp"
#include "secagg/wire.hpp"

namespace secagg {

// ---- toy model -------------------------------------------------------------

// Rows of X with matching targets y.
struct Batch {
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
};

// Gradient of the mean squared error of X*theta against y:
// 2 * X^T (X theta - y) / batch_size.
std::vector<double> produce_gradient(std::span<const double> theta, const Batch& batch);

// Elementwise mean of L >= 1 equal-length vectors.
std::vector<double> local_aggregate(const std::vector<std::vector<double>>& vectors);

// theta - learning_rate * gradient.
std::vector<double> apply_update(std::span<const double> theta,
                                 std::span<const double> gradient,
                                 double learning_rate);

// What a learner contributes each training round.
class GradientSource {
 public:
  virtual ~GradientSource() = default;
  virtual std::vector<double> gradient(std::uint32_t training_round) = 0;
  // Averaged gradient of the federation for that round.
  virtual void apply(std::uint32_t training_round, std::span<const double> average) = 0;
};

// Full-batch gradient descent on a local least-squares shard.
class LinearRegressionSource final : public GradientSource {
 public:
  LinearRegressionSource(std::vector<double> theta, Batch batch, double learning_rate);

  std::vector<double> gradient(std::uint32_t training_round) override;
  void apply(std::uint32_t training_round, std::span<const double> average) override;

  const std::vector<double>& theta() const { return theta_; }

 private:
  std::vector<double> theta_;
  Batch batch_;
  double learning_rate_;
};

// A domain's local aggregator: averages its learners in plaintext and
// forwards the federated average back to each of them.
class LocalAggregatorSource final : public GradientSource {
 public:
  explicit LocalAggregatorSource(std::vector<std::unique_ptr<GradientSource>> learners);

  std::vector<double> gradient(std::uint32_t training_round) override;
  void apply(std::uint32_t training_round, std::span<const double> average) override;

  std::size_t domain_learners() const { return learners_.size(); }
  GradientSource& learner(std::size_t i) { return *learners_.at(i); }

 private:
  std::vector<std::unique_ptr<GradientSource>> learners_;
};

// Returns the same vector every round and records what it was given.
class FixedSource final : public GradientSource {
 public:
  explicit FixedSource(std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> gradient(std::uint32_t) override { return values_; }
  void apply(std::uint32_t, std::span<const double> average) override {
    received_.assign(average.begin(), average.end());
  }
  const std::vector<double>& received() const { return received_; }

 private:
  std::vector<double> values_;
  std::vector<double> received_;
};

// ---- configuration ---------------------------------------------------------

enum class LearnerRole : std::uint8_t { kLearner, kLocalAggregator };

struct LearnerConfig {
  std::string name;
  std::string endpoint;
  std::string coordinator = "coordinator";
  std::optional<std::string> location_tag;
  JobId job_id{};
  AuthToken token{};
  LearnerRole role = LearnerRole::kLearner;
  unsigned domain_learners = 1;

  // "key = value" lines; '#' starts a comment. Unknown keys are rejected.
  static LearnerConfig parse(std::string_view text);
  static LearnerConfig load(const std::string& path);
};

// ---- client ----------------------------------------------------------------

// Makes the learner go silent (no sends, no heartbeats, inbound dropped)
// just before its fail_at_step-th outbound message of a training round.
struct FailPlan {
  std::uint32_t training_round = 1;
  std::size_t fail_at_step = 0;
  std::optional<double> recover_after_s;
};

struct LearnerRoundTiming {
  std::uint32_t round = 0;
  std::uint32_t training_round = 0;
  Protocol protocol = Protocol::kRing;
  std::size_t parties = 0;
  std::size_t rank = 0;
  double start_time = 0;          // RESUME received
  double last_delivery_time = 0;  // delivery of the last message this learner sent
  double result_time = 0;
  double transform_cpu_s = 0;     // encoding, encryption, homomorphic additions
  std::size_t bytes_sent = 0;
  std::size_t messages_sent = 0;
};

enum class LearnerStatus : std::uint8_t { kRegistering, kReady, kCompleted, kAborted, kSilent };

const char* to_string(LearnerStatus s);

class LearnerClient final : public FrameHandler {
 public:
  LearnerClient(LearnerConfig config, Transport& transport, GradientSource& source,
                RandomSource& rng);
  ~LearnerClient() override;

  LearnerClient(const LearnerClient&) = delete;
  LearnerClient& operator=(const LearnerClient&) = delete;

  // Sends REGISTER and starts the heartbeat timer.
  void start();
  void on_frame(ByteView frame) override;

  void set_contribution(Contribution c) { contribution_ = std::move(c); }
  void set_fail_plan(FailPlan plan) { fail_plan_ = plan; }
  // Leave the silent state and resume heartbeats.
  void revive();

  double heartbeat_interval_s = 1.0;
  double message_timeout_s = 5.0;
  // Zero the recorded transform CPU time (deterministic reports).
  bool measure_transform = true;

  const LearnerConfig& config() const { return config_; }
  LearnerStatus status() const { return status_; }
  std::size_t rank() const { return rank_; }
  std::size_t parties() const { return members_.size(); }
  std::uint32_t completed_rounds() const { return completed_rounds_; }
  const std::vector<LearnerRoundTiming>& timings() const { return timings_; }
  const std::vector<ErrorPayload>& errors() const { return errors_; }
  const std::optional<DuplicateReport>& red_flag() const { return red_flag_; }
  const RoundSession* session() const { return session_.get(); }

 private:
  void handle(const Frame& frame);
  void on_topology(const TopologyAssignPayload& t);
  void on_resume(const ResumePayload& r);
  void on_aggregate(const Frame& frame);
  void on_result(const ResultPayload& r);
  void deliver(const AggregateMessage& msg);
  void dispatch(std::vector<Outbound> out);
  void session_failed(const Error& e);
  void send_coordinator(MessageType type, Bytes payload);
  void heartbeat_tick(std::uint64_t generation);
  void arm_message_timeout();
  void message_timeout(std::uint64_t generation);
  void go_silent();

  LearnerConfig config_;
  Transport& transport_;
  GradientSource& source_;
  RandomSource& rng_;
  Contribution contribution_;
  std::optional<FailPlan> fail_plan_;

  LearnerStatus status_ = LearnerStatus::kRegistering;
  AuthToken peer_token_{};
  std::vector<TopologyMember> members_;  // rank order
  std::size_t rank_ = 0;
  Protocol protocol_ = Protocol::kRing;
  CodecConfig codec_;
  std::uint32_t total_rounds_ = 0;
  std::map<std::uint32_t, PublicKey> keys_;

  std::uint32_t round_ = 0;
  std::uint32_t training_round_ = 0;
  std::uint32_t epoch_ = 0;
  std::unique_ptr<RoundSession> session_;
  std::map<std::uint32_t, std::vector<Frame>> early_;  // frames for later rounds
  std::uint32_t gradient_round_ = 0;
  std::vector<double> gradient_;
  std::size_t sends_this_round_ = 0;
  std::uint32_t completed_rounds_ = 0;

  std::uint64_t heartbeat_seq_ = 0;
  std::uint64_t heartbeat_generation_ = 0;
  std::uint64_t timeout_generation_ = 0;
  bool silent_ = false;
  LearnerStatus status_before_silence_ = LearnerStatus::kReady;

  std::vector<LearnerRoundTiming> timings_;
  std::vector<ErrorPayload> errors_;
  std::optional<DuplicateReport> red_flag_;
};

}  // namespace secagg

#endif  // SECAGG_LEARNER_HPP_
