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

// Discrete-event harness: one coordinator and P learners on a simulated
// network with a virtual clock, driven by a Scenario.

#ifndef SECAGG_SIM_HPP_
#define SECAGG_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/coordinator.hpp"
#include "secagg/learner.hpp"
#include "secagg/transport.hpp"

namespace secagg {

// Every link has the same one-way latency; each sender's NIC pushes one frame
// at a time at 'bandwidth_Bps' (0 means unlimited).
struct LinkModel {
  double latency_s = 0;
  double bandwidth_Bps = 0;
};

struct TranscriptEntry {
  double send_time = 0;
  double arrival_time = 0;
  std::string from;
  std::string to;
  Bytes frame;
};

class SimNetwork {
 public:
  explicit SimNetwork(LinkModel link);
  ~SimNetwork();

  SimNetwork(const SimNetwork&) = delete;
  SimNetwork& operator=(const SimNetwork&) = delete;

  // Transport for the node at 'endpoint'; frames are dropped until a
  // handler is set.
  Transport& attach(const std::string& endpoint);
  void set_handler(const std::string& endpoint, FrameHandler* handler);

  double now() const { return now_; }
  void schedule(double at, std::function<void()> fn);
  // Processes one event; false when the queue is empty.
  bool step();
  // Runs until the queue drains, 'stop' returns true or the clock passes 'until'.
  void run(double until = std::numeric_limits<double>::infinity(),
           const std::function<bool()>& stop = {});

  bool record_transcript = true;
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  std::vector<TranscriptEntry> take_transcript() { return std::move(transcript_); }
  std::size_t frames_sent() const { return frames_sent_; }

 private:
  class Node;
  friend class Node;

  double send(const std::string& from, const std::string& to, Bytes frame);

  struct Event {
    double time;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  LinkModel link_;
  double now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<std::string, std::unique_ptr<Node>> nodes_;
  std::map<std::string, double> nic_free_;
  std::vector<TranscriptEntry> transcript_;
  std::size_t frames_sent_ = 0;
};

// ---- scenarios -------------------------------------------------------------

struct FailureSpec {
  std::uint32_t round = 1;      // training round
  std::size_t rank = 1;         // rank in the initial ring
  std::size_t fail_at_step = 0; // index of the learner's outbound message
  std::optional<double> recover_after_s;
};

enum class CollusionMode : std::uint8_t { kPassThrough, kDuplicateCiphertext };

const char* to_string(CollusionMode m);

struct CollusionPlan {
  std::vector<std::size_t> ranks;
  CollusionMode mode = CollusionMode::kDuplicateCiphertext;
};

enum class TransformTiming : std::uint8_t { kMeasured, kZero };

struct Scenario {
  std::size_t parties = 3;
  Protocol protocol = Protocol::kRing;
  std::size_t vector_length = 16;
  unsigned key_bits = 512;
  std::uint32_t rounds = 1;
  double latency_ms = 0;
  double bandwidth = 0;  // bytes per second, 0 = unlimited
  std::vector<FailureSpec> failure_plan;
  std::optional<CollusionPlan> collusion_plan;
  std::uint64_t seed = 1;
  RingStrategy strategy = RingStrategy::kNameAscending;
  CodecConfig codec{40, 64, 65536.0};
  TransformTiming transform = TransformTiming::kMeasured;
  RotationPolicy rotation;
  HeartbeatConfig heartbeat;
  // Keep every frame for later inspection (memory grows with P^2 * length
  // under broadcast).
  bool record_transcript = true;

  // Throws kInvalidArgument when the scenario cannot run.
  void validate() const;

  // Text "key = value" form or JSON (detected by a leading '{').
  static Scenario parse(std::string_view text);
  static Scenario load(const std::string& path);
};

struct ReportRow {
  std::size_t parties = 0;
  Protocol protocol = Protocol::kRing;
  std::uint32_t round = 0;
  double comm_time_s = 0;
  double transform_time_s = 0;
  double total_sync_time_s = 0;
};

// Sorted by (parties, protocol, round); header line, 9-digit decimals, LF.
void write_report(std::ostream& out, std::vector<ReportRow> rows);
// Always truncates 'path'. Throws kIo when it cannot be written.
void emit_report(const std::string& path, const std::vector<ReportRow>& rows);

// Uniform values in [-1, 1), fresh every round.
class RandomGradientSource final : public GradientSource {
 public:
  RandomGradientSource(const Seed& seed, std::size_t length);
  std::vector<double> gradient(std::uint32_t training_round) override;
  void apply(std::uint32_t, std::span<const double> average) override {
    last_average_.assign(average.begin(), average.end());
  }
  const std::vector<double>& last_average() const { return last_average_; }

 private:
  Seed seed_;
  std::size_t length_;
  std::vector<double> last_average_;
};

// A coordinator plus P learners wired to one SimNetwork.
class SimCluster {
 public:
  // 'sources' are indexed by initial rank - 1; missing ones get a
  // RandomGradientSource.
  explicit SimCluster(Scenario scenario,
                      std::vector<std::unique_ptr<GradientSource>> sources = {});
  ~SimCluster();

  // Registers every learner and runs until the job finishes.
  void run();

  const Scenario& scenario() const { return scenario_; }
  SimNetwork& network() { return *network_; }
  Coordinator& coordinator() { return *coordinator_; }
  const JobId& job_id() const { return job_id_; }
  JobState state() const { return coordinator_->state(job_id_); }
  std::size_t learner_count() const { return learners_.size(); }
  // Learner that holds 'rank' in the initial ring.
  LearnerClient& learner_at_initial_rank(std::size_t rank);
  GradientSource& source_at_initial_rank(std::size_t rank);
  const RingTopology& initial_ring() const { return *initial_ring_; }

  // One row per completed training round.
  std::vector<ReportRow> report() const;

  static std::string learner_name(std::size_t index);

 private:
  Scenario scenario_;
  JobId job_id_{};
  std::unique_ptr<SimNetwork> network_;
  std::unique_ptr<Coordinator> coordinator_;
  std::optional<RingTopology> initial_ring_;
  std::vector<std::unique_ptr<GradientSource>> sources_;  // by initial rank - 1
  std::vector<std::unique_ptr<RandomSource>> rngs_;
  std::vector<std::unique_ptr<LearnerClient>> learners_;  // by initial rank - 1
};

// ---- analysis --------------------------------------------------------------

// A needle found outside ciphertext regions of a frame.
struct ScanFinding {
  std::size_t frame_index = 0;
  std::size_t offset = 0;
  std::string needle;
};

struct Needle {
  std::string label;
  Bytes bytes;
};

// Searches every frame for the needles with AGG_MSG/AGG_SUBMIT ciphertext
// bytes masked out.
std::vector<ScanFinding> scan_transcript(const std::vector<TranscriptEntry>& transcript,
                                         const std::vector<Needle>& needles);

// Pass-through collusion analysis: learner r contributes the indicator
// vector e_r and colluders forward without adding anything, so the decrypted
// aggregate spells out exactly whose vectors it contains.
struct ExposureAnalysis {
  std::size_t parties = 0;
  std::vector<std::size_t> colluders;
  std::set<std::size_t> contributors;  // ranks visible in the aggregate
  bool isolated = false;               // exactly one honest vector exposed
  bool completed = false;
};

ExposureAnalysis analyze_pass_through(std::size_t parties,
                                      const std::vector<std::size_t>& colluders,
                                      Protocol protocol, std::uint64_t seed,
                                      unsigned key_bits = 512);

struct ScenarioResult {
  std::vector<ReportRow> rows;
  std::vector<TranscriptEntry> transcript;
  std::vector<JobEvent> events;
  JobStatus final_status = JobStatus::kForming;
  std::vector<std::string> failed_assertions;
  std::vector<std::string> notes;
  std::optional<DuplicateReport> red_flag;
  int exit_code = 0;  // 0 ok, 2 protocol failure, 3 assertion failure
};

// Runs the scenario on the simulated network and checks the assertions
// implied by its failure and collusion plans.
ScenarioResult run_scenario(const Scenario& scenario);

}  // namespace secagg

#endif  // SECAGG_SIM_HPP_
