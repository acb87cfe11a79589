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

#include "secagg/learner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "secagg/coordinator.hpp"
#include "secagg/timing.hpp"

namespace secagg {

std::vector<double> produce_gradient(std::span<const double> theta, const Batch& batch) {
  if (batch.x.size() != batch.y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "batch has " + std::to_string(batch.x.size()) +
                                                " rows but " + std::to_string(batch.y.size()) +
                                                " targets");
  }
  if (batch.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  const std::size_t d = theta.size();
  std::vector<double> grad(d, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& row = batch.x[i];
    if (row.size() != d) {
      throw Error(ErrorCode::kLengthMismatch, "row " + std::to_string(i) + " has " +
                                                  std::to_string(row.size()) +
                                                  " features, model has " + std::to_string(d));
    }
    double residual = -batch.y[i];
    for (std::size_t j = 0; j < d; ++j) residual += row[j] * theta[j];
    for (std::size_t j = 0; j < d; ++j) grad[j] += row[j] * residual;
  }
  const double scale = 2.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= scale;
  return grad;
}

std::vector<double> local_aggregate(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to aggregate");
  const std::size_t len = vectors.front().size();
  std::vector<double> sum(len, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != len) {
      throw Error(ErrorCode::kLengthMismatch, "local vectors differ in length");
    }
    for (std::size_t i = 0; i < len; ++i) sum[i] += v[i];
  }
  for (double& s : sum) s /= static_cast<double>(vectors.size());
  return sum;
}

std::vector<double> apply_update(std::span<const double> theta,
                                 std::span<const double> gradient,
                                 double learning_rate) {
  if (theta.size() != gradient.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gradient length differs from model");
  }
  if (!(learning_rate > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - learning_rate * gradient[i];
  return out;
}

LinearRegressionSource::LinearRegressionSource(std::vector<double> theta, Batch batch,
                                               double learning_rate)
    : theta_(std::move(theta)), batch_(std::move(batch)), learning_rate_(learning_rate) {}

std::vector<double> LinearRegressionSource::gradient(std::uint32_t) {
  return produce_gradient(theta_, batch_);
}

void LinearRegressionSource::apply(std::uint32_t, std::span<const double> average) {
  theta_ = apply_update(theta_, average, learning_rate_);
}

LocalAggregatorSource::LocalAggregatorSource(
    std::vector<std::unique_ptr<GradientSource>> learners)
    : learners_(std::move(learners)) {
  if (learners_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "a local aggregator needs at least one learner");
  }
}

std::vector<double> LocalAggregatorSource::gradient(std::uint32_t training_round) {
  std::vector<std::vector<double>> grads;
  grads.reserve(learners_.size());
  for (auto& l : learners_) grads.push_back(l->gradient(training_round));
  return local_aggregate(grads);
}

void LocalAggregatorSource::apply(std::uint32_t training_round,
                                  std::span<const double> average) {
  for (auto& l : learners_) l->apply(training_round, average);
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

LearnerConfig LearnerConfig::parse(std::string_view text) {
  LearnerConfig cfg;
  bool have_name = false, have_endpoint = false, have_job = false, have_token = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "name") {
      cfg.name = value;
      have_name = true;
    } else if (key == "endpoint") {
      cfg.endpoint = value;
      have_endpoint = true;
    } else if (key == "coordinator") {
      cfg.coordinator = value;
    } else if (key == "location_tag") {
      cfg.location_tag = value;
    } else if (key == "job_id") {
      cfg.job_id = job_id_from_string(value);
      have_job = true;
    } else if (key == "token") {
      cfg.token = token_from_hex(value);
      have_token = true;
    } else if (key == "role") {
      if (value == "learner") {
        cfg.role = LearnerRole::kLearner;
      } else if (value == "local_aggregator") {
        cfg.role = LearnerRole::kLocalAggregator;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown role '" + value + "'");
      }
    } else if (key == "domain_learners") {
      int n = 0;
      try {
        n = std::stoi(value);
      } catch (const std::exception&) {
        n = 0;
      }
      if (n < 1) throw Error(ErrorCode::kInvalidArgument, "domain_learners must be >= 1");
      cfg.domain_learners = static_cast<unsigned>(n);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown key '" + key + "'");
    }
  }
  if (!have_name || !have_endpoint || !have_job || !have_token) {
    throw Error(ErrorCode::kInvalidArgument,
                "learner config needs name, endpoint, job_id and token");
  }
  if (cfg.role == LearnerRole::kLearner && cfg.domain_learners != 1) {
    throw Error(ErrorCode::kInvalidArgument, "domain_learners > 1 requires local_aggregator");
  }
  return cfg;
}

LearnerConfig LearnerConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const char* to_string(LearnerStatus s) {
  switch (s) {
    case LearnerStatus::kRegistering: return "registering";
    case LearnerStatus::kReady: return "ready";
    case LearnerStatus::kCompleted: return "completed";
    case LearnerStatus::kAborted: return "aborted";
    case LearnerStatus::kSilent: return "silent";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

LearnerClient::LearnerClient(LearnerConfig config, Transport& transport,
                             GradientSource& source, RandomSource& rng)
    : config_(std::move(config)),
      transport_(transport),
      source_(source),
      rng_(rng),
      peer_token_(peer_credential(config_.token)) {}

LearnerClient::~LearnerClient() = default;

void LearnerClient::start() {
  Participant self{config_.name, config_.location_tag, config_.endpoint};
  send_coordinator(MessageType::kRegister, encode(RegisterPayload{self}));
  std::uint64_t gen = ++heartbeat_generation_;
  transport_.call_after(heartbeat_interval_s, [this, gen] { heartbeat_tick(gen); });
}

void LearnerClient::send_coordinator(MessageType type, Bytes payload) {
  if (silent_) return;
  Frame f{type, config_.job_id, config_.token, std::move(payload)};
  transport_.send(config_.coordinator, encode_frame(f));
}

void LearnerClient::heartbeat_tick(std::uint64_t generation) {
  if (generation != heartbeat_generation_ || silent_) return;
  if (status_ == LearnerStatus::kCompleted || status_ == LearnerStatus::kAborted) return;
  send_coordinator(MessageType::kHeartbeat, encode(HeartbeatPayload{++heartbeat_seq_}));
  transport_.call_after(heartbeat_interval_s,
                        [this, generation] { heartbeat_tick(generation); });
}

void LearnerClient::go_silent() {
  status_before_silence_ = status_;
  silent_ = true;
  status_ = LearnerStatus::kSilent;
  ++heartbeat_generation_;
  ++timeout_generation_;
  if (fail_plan_ && fail_plan_->recover_after_s) {
    transport_.call_after(*fail_plan_->recover_after_s, [this] { revive(); });
  }
  fail_plan_.reset();
}

void LearnerClient::revive() {
  if (!silent_) return;
  silent_ = false;
  status_ = status_before_silence_;
  send_coordinator(MessageType::kHeartbeat, encode(HeartbeatPayload{++heartbeat_seq_}));
  std::uint64_t gen = ++heartbeat_generation_;
  transport_.call_after(heartbeat_interval_s, [this, gen] { heartbeat_tick(gen); });
}

void LearnerClient::on_frame(ByteView bytes) {
  if (silent_) return;
  Frame frame;
  try {
    frame = decode_frame(bytes);
  } catch (const Error& e) {
    errors_.push_back(ErrorPayload{e.code(), e.what()});
    return;
  }
  if (frame.job_id != config_.job_id) return;
  try {
    handle(frame);
  } catch (const Error& e) {
    errors_.push_back(ErrorPayload{e.code(), e.what()});
  }
}

void LearnerClient::handle(const Frame& frame) {
  if (frame.type == MessageType::kAggMsg) {
    on_aggregate(frame);
    return;
  }
  // Everything else must come from the coordinator over our own credential.
  if (!constant_time_equal(frame.token, config_.token)) {
    throw Error(ErrorCode::kAuthFailed, std::string("unauthenticated ") + to_string(frame.type));
  }
  switch (frame.type) {
    case MessageType::kTopologyAssign:
      on_topology(decode_topology_assign(frame.payload));
      break;
    case MessageType::kPubkey: {
      PubkeyPayload p = decode_pubkey(frame.payload);
      keys_.insert_or_assign(p.epoch, PublicKey::deserialize(p.public_key));
      break;
    }
    case MessageType::kResume:
      on_resume(decode_resume(frame.payload));
      break;
    case MessageType::kResult:
      on_result(decode_result(frame.payload));
      break;
    case MessageType::kPause: {
      PausePayload p = decode_pause(frame.payload);
      if (session_ && p.round == round_ && session_->phase() == Phase::kAggregating) {
        session_->pause();
      }
      ++timeout_generation_;
      break;
    }
    case MessageType::kError: {
      ErrorPayload e = decode_error(frame.payload);
      errors_.push_back(e);
      if (e.code == ErrorCode::kAborted) {
        status_ = LearnerStatus::kAborted;
        ++timeout_generation_;
        if (session_ && session_->phase() != Phase::kDone &&
            session_->phase() != Phase::kFailed) {
          session_->fail();
        }
      }
      break;
    }
    default:
      break;
  }
}

void LearnerClient::on_topology(const TopologyAssignPayload& t) {
  members_ = t.members;
  rank_ = t.your_rank;
  protocol_ = t.protocol;
  codec_ = t.codec;
  total_rounds_ = t.total_rounds;
  // A new ring invalidates whatever round was in flight. Frames for later
  // rounds stay buffered: over real sockets a peer's first message can beat
  // our own TOPOLOGY_ASSIGN, and they are checked against the new members on
  // replay.
  session_.reset();
  early_.erase(early_.begin(), early_.upper_bound(round_));
  if (status_ == LearnerStatus::kRegistering) status_ = LearnerStatus::kReady;
}

void LearnerClient::on_resume(const ResumePayload& r) {
  if (status_ != LearnerStatus::kReady) return;
  if (r.round <= round_) return;
  auto key = keys_.find(r.epoch);
  if (key == keys_.end()) {
    throw Error(ErrorCode::kStaleEpoch, "no public key for epoch " + std::to_string(r.epoch));
  }
  if (members_.empty() || rank_ == 0) {
    throw Error(ErrorCode::kBadState, "RESUME before TOPOLOGY_ASSIGN");
  }
  round_ = r.round;
  training_round_ = r.training_round;
  epoch_ = r.epoch;
  sends_this_round_ = 0;
  // Older epochs are no longer needed once a round runs under a newer one.
  keys_.erase(keys_.begin(), keys_.lower_bound(r.epoch));

  // A restarted round reuses the gradient of its training round.
  if (gradient_round_ != training_round_) {
    gradient_ = source_.gradient(training_round_);
    gradient_round_ = training_round_;
  }

  LearnerRoundTiming timing;
  timing.round = round_;
  timing.training_round = training_round_;
  timing.protocol = protocol_;
  timing.parties = members_.size();
  timing.rank = rank_;
  timing.start_time = transport_.now();
  timings_.push_back(timing);

  RoundContext ctx{config_.job_id, round_, rank_, members_.size(), protocol_};
  std::vector<Outbound> out;
  double cpu = 0;
  {
    CpuTimer timer(cpu);
    EncodedVector own = encode(codec_, key->second, gradient_);
    session_ = make_session(ctx, key->second, std::move(own), rng_, contribution_);
    out = session_->start();
  }
  if (measure_transform) timings_.back().transform_cpu_s += cpu;
  dispatch(std::move(out));
  arm_message_timeout();

  // Peers that started earlier may already have sent us this round's data.
  for (auto it = early_.begin(); it != early_.end();) {
    if (it->first < round_) {
      it = early_.erase(it);
    } else if (it->first == round_) {
      std::vector<Frame> frames = std::move(it->second);
      it = early_.erase(it);
      for (const Frame& f : frames) {
        if (silent_ || !session_) break;
        on_aggregate(f);
      }
    } else {
      ++it;
    }
  }
}

void LearnerClient::on_aggregate(const Frame& frame) {
  AggregateMessage header = peek_aggregate_header(frame.payload);
  if (header.sender_rank < 1 || header.sender_rank > members_.size()) {
    if (members_.empty() && header.round > round_) {
      early_[header.round].push_back(frame);
      return;
    }
    throw Error(ErrorCode::kWrongSender, "AGG_MSG from unknown rank");
  }
  if (!constant_time_equal(token_digest(frame.token),
                           members_[header.sender_rank - 1].token_digest)) {
    throw Error(ErrorCode::kAuthFailed,
                "peer credential mismatch for rank " + std::to_string(header.sender_rank));
  }
  if (header.round < round_) return;  // interrupted attempt
  if (header.round > round_ || !session_) {
    early_[header.round].push_back(frame);
    return;
  }
  if (status_ != LearnerStatus::kReady) return;
  const PublicKey& pk = keys_.at(epoch_);
  AggregateMessage msg = decode_aggregate(frame.payload, pk);
  deliver(msg);
}

void LearnerClient::deliver(const AggregateMessage& msg) {
  std::vector<Outbound> out;
  double cpu = 0;
  try {
    CpuTimer timer(cpu);
    out = session_->on_message(msg);
  } catch (const Error& e) {
    if (measure_transform) timings_.back().transform_cpu_s += cpu;
    session_failed(e);
    return;
  }
  if (measure_transform) timings_.back().transform_cpu_s += cpu;
  dispatch(std::move(out));
  arm_message_timeout();
}

void LearnerClient::session_failed(const Error& e) {
  ++timeout_generation_;
  if (e.code() == ErrorCode::kRedFlag) {
    auto* bc = dynamic_cast<BroadcastSession*>(session_.get());
    if (bc != nullptr && bc->red_flag()) red_flag_ = bc->red_flag();
  }
  errors_.push_back(ErrorPayload{e.code(), e.what()});
  // A colluder does not report the duplicates it planted.
  if (e.code() == ErrorCode::kRedFlag && contribution_.shared_nonce_seed) return;
  send_coordinator(MessageType::kError, encode(ErrorPayload{e.code(), e.what()}));
}

void LearnerClient::dispatch(std::vector<Outbound> out) {
  const PublicKey& pk = keys_.at(epoch_);
  for (Outbound& o : out) {
    if (fail_plan_ && fail_plan_->training_round == training_round_ &&
        fail_plan_->fail_at_step == sends_this_round_) {
      go_silent();
      return;
    }
    ++sends_this_round_;
    Bytes bytes;
    std::string to;
    if (o.to_rank == kDecryptorRank) {
      AggregateSubmission sub{pk.fingerprint(), std::move(o.message)};
      bytes = encode_frame(Frame{MessageType::kAggSubmit, config_.job_id, config_.token,
                                 encode(sub, pk)});
      to = config_.coordinator;
    } else {
      bytes = encode_frame(Frame{MessageType::kAggMsg, config_.job_id, peer_token_,
                                 encode(o.message, pk)});
      to = members_.at(o.to_rank - 1).participant.endpoint;
    }
    LearnerRoundTiming& t = timings_.back();
    t.bytes_sent += bytes.size();
    ++t.messages_sent;
    t.last_delivery_time = std::max(t.last_delivery_time, transport_.send(to, std::move(bytes)));
  }
}

void LearnerClient::arm_message_timeout() {
  std::uint64_t gen = ++timeout_generation_;
  if (!session_ || session_->phase() != Phase::kAggregating) return;
  transport_.call_after(message_timeout_s, [this, gen] { message_timeout(gen); });
}

void LearnerClient::message_timeout(std::uint64_t generation) {
  if (generation != timeout_generation_ || silent_ || !session_) return;
  if (session_->phase() != Phase::kAggregating) return;
  session_->pause();
  send_coordinator(MessageType::kPause,
                   encode(PausePayload{round_, "no protocol message for " +
                                                   std::to_string(message_timeout_s) + " s"}));
}

void LearnerClient::on_result(const ResultPayload& r) {
  if (r.round != round_ || !session_) return;
  if (session_->phase() == Phase::kDone) return;
  if (session_->phase() != Phase::kAwaitingDecryption) {
    throw Error(ErrorCode::kBadState, std::string("RESULT while ") + to_string(session_->phase()));
  }
  if (r.average.size() != gradient_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "result length differs from gradient");
  }
  session_->complete();
  ++timeout_generation_;
  timings_.back().result_time = transport_.now();
  source_.apply(r.training_round, r.average);
  ++completed_rounds_;
  if (r.training_round >= total_rounds_) status_ = LearnerStatus::kCompleted;
}

}  // namespace secagg
