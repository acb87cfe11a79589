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

#include "secagg/coordinator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "secagg/timing.hpp"

namespace secagg {

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::kForming: return "forming";
    case JobStatus::kRunning: return "running";
    case JobStatus::kPaused: return "paused";
    case JobStatus::kCompleted: return "completed";
    case JobStatus::kAborted: return "aborted";
  }
  return "unknown";
}

const char* to_string(JobEventKind k) {
  switch (k) {
    case JobEventKind::kRegistered: return "registered";
    case JobEventKind::kRejected: return "rejected";
    case JobEventKind::kStarted: return "started";
    case JobEventKind::kKeyRotated: return "key_rotated";
    case JobEventKind::kRoundStarted: return "round_started";
    case JobEventKind::kRoundCompleted: return "round_completed";
    case JobEventKind::kRoundFailed: return "round_failed";
    case JobEventKind::kMemberFailed: return "member_failed";
    case JobEventKind::kPaused: return "paused";
    case JobEventKind::kReconnected: return "reconnected";
    case JobEventKind::kResumed: return "resumed";
    case JobEventKind::kEliminated: return "eliminated";
    case JobEventKind::kRebuilt: return "rebuilt";
    case JobEventKind::kRedFlag: return "red_flag";
    case JobEventKind::kStaleEpoch: return "stale_epoch";
    case JobEventKind::kLearnerStalled: return "learner_stalled";
    case JobEventKind::kAuthFailed: return "auth_failed";
    case JobEventKind::kAborted: return "aborted";
    case JobEventKind::kCompleted: return "completed";
  }
  return "unknown";
}

Seed epoch_key_seed(const Seed& job_seed, std::uint32_t epoch) {
  return derive_seed(job_seed, "paillier-epoch-" + std::to_string(epoch));
}

AuthToken peer_credential(const AuthToken& token) {
  static constexpr char kLabel[] = "secagg/peer-credential";
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kLabel), sizeof(kLabel) - 1));
  w.raw(token);
  return sha256(w.bytes());
}

namespace {

std::string join_ranks(const std::vector<std::size_t>& ranks) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ranks.size(); ++i) os << (i ? "," : "") << ranks[i];
  return os.str();
}

// Trailing comma-separated rank list, e.g. "... ranks 2,3".
std::vector<std::size_t> parse_trailing_ranks(const std::string& detail) {
  std::vector<std::size_t> out;
  auto pos = detail.find_last_of(' ');
  std::string tail = pos == std::string::npos ? detail : detail.substr(pos + 1);
  std::stringstream ss(tail);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), [](unsigned char c) {
          return std::isdigit(c);
        })) {
      return {};
    }
    out.push_back(std::stoul(item));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SubmissionCollector::SubmissionCollector(Protocol protocol, std::size_t parties,
                                         std::size_t vector_length,
                                         std::uint32_t round)
    : protocol_(protocol),
      parties_(parties),
      vector_length_(vector_length),
      round_(round) {
  if (parties < 2) {
    throw Error(ErrorCode::kTopology, "collector needs at least two parties");
  }
  if (protocol == Protocol::kAllReduce) schedule_.emplace(parties, vector_length);
}

std::set<std::size_t> SubmissionCollector::submitters() const {
  std::set<std::size_t> out;
  for (const auto& [rank, msg] : by_rank_) out.insert(rank);
  return out;
}

bool SubmissionCollector::add(const AggregateMessage& msg, const PublicKey& pk) {
  if (complete_) {
    throw Error(ErrorCode::kBadState, "round aggregate already complete");
  }
  if (msg.round != round_) {
    throw Error(ErrorCode::kWrongRound, "submission for round " + std::to_string(msg.round) +
                                            ", collecting round " + std::to_string(round_));
  }
  const std::size_t sender = msg.sender_rank;
  if (sender < 1 || sender > parties_) {
    throw Error(ErrorCode::kWrongSender, "submission from rank outside ring");
  }
  if (by_rank_.count(sender) != 0) {
    throw Error(ErrorCode::kDuplicate, "second submission from rank " + std::to_string(sender));
  }
  for (const Ciphertext& c : msg.ciphertexts) {
    if (c.key_fingerprint() != pk.fingerprint()) {
      throw Error(ErrorCode::kKeyMismatch, "submission under a different key");
    }
  }

  switch (protocol_) {
    case Protocol::kRing: {
      if (sender != parties_) {
        throw Error(ErrorCode::kWrongSender,
                    "ring aggregate must come from rank " + std::to_string(parties_) +
                        ", not rank " + std::to_string(sender));
      }
      if (msg.kind != PayloadKind::kFullVector) {
        throw Error(ErrorCode::kMalformedFrame, "ring submission must be a full vector");
      }
      if (vector_length_ != 0 && msg.ciphertexts.size() != vector_length_) {
        throw Error(ErrorCode::kLengthMismatch, "ring submission has wrong length");
      }
      by_rank_.emplace(sender, msg);
      aggregate_ = msg.ciphertexts;
      complete_ = true;
      break;
    }
    case Protocol::kBroadcast: {
      if (msg.kind != PayloadKind::kFullVector) {
        throw Error(ErrorCode::kMalformedFrame, "broadcast submission must be a full vector");
      }
      std::size_t expected = vector_length_ != 0 ? vector_length_
                             : by_rank_.empty()  ? msg.ciphertexts.size()
                                                 : by_rank_.begin()->second.ciphertexts.size();
      if (msg.ciphertexts.size() != expected) {
        throw Error(ErrorCode::kLengthMismatch, "broadcast submission has wrong length");
      }
      by_rank_.emplace(sender, msg);
      if (by_rank_.size() < parties_) break;

      std::map<Bytes, std::vector<std::size_t>> groups;
      for (const auto& [rank, m] : by_rank_) {
        groups[serialize_ciphertexts(pk, m.ciphertexts)].push_back(rank);
      }
      if (groups.size() > 1) {
        std::size_t largest = 0, count_largest = 0;
        for (const auto& [bytes, ranks] : groups) largest = std::max(largest, ranks.size());
        for (const auto& [bytes, ranks] : groups) count_largest += ranks.size() == largest;
        for (const auto& [bytes, ranks] : groups) {
          if (count_largest > 1 || ranks.size() != largest) {
            divergent_.insert(divergent_.end(), ranks.begin(), ranks.end());
          }
        }
        std::sort(divergent_.begin(), divergent_.end());
        throw Error(ErrorCode::kDivergentSubmission,
                    "divergent broadcast sums from ranks " + join_ranks(divergent_));
      }
      aggregate_ = by_rank_.begin()->second.ciphertexts;
      complete_ = true;
      break;
    }
    case Protocol::kAllReduce: {
      if (msg.kind != PayloadKind::kChunk) {
        throw Error(ErrorCode::kMalformedFrame, "all-reduce submission must be a chunk");
      }
      if (msg.step != parties_ - 1) {
        throw Error(ErrorCode::kOutOfOrder, "chunk submitted before the final step");
      }
      if (msg.chunk_index != schedule_->final_chunk(sender)) {
        throw Error(ErrorCode::kWrongSender,
                    "rank " + std::to_string(sender) + " does not own chunk " +
                        std::to_string(msg.chunk_index));
      }
      if (vector_length_ != 0 &&
          msg.ciphertexts.size() != schedule_->bounds(msg.chunk_index).size) {
        throw Error(ErrorCode::kLengthMismatch, "chunk has wrong length");
      }
      by_rank_.emplace(sender, msg);
      if (by_rank_.size() < parties_) break;

      std::size_t total = 0;
      for (const auto& [rank, m] : by_rank_) total += m.ciphertexts.size();
      std::vector<ChunkBounds> bounds = chunk_bounds(total, parties_);
      std::vector<const AggregateMessage*> by_chunk(parties_, nullptr);
      for (const auto& [rank, m] : by_rank_) by_chunk[m.chunk_index - 1] = &m;
      aggregate_.clear();
      aggregate_.reserve(total);
      for (std::size_t i = 0; i < parties_; ++i) {
        if (by_chunk[i] == nullptr) {
          throw Error(ErrorCode::kMissingChunk, "chunk " + std::to_string(i + 1) + " missing");
        }
        if (by_chunk[i]->ciphertexts.size() != bounds[i].size) {
          throw Error(ErrorCode::kLengthMismatch,
                      "chunk " + std::to_string(i + 1) + " has wrong length");
        }
        aggregate_.insert(aggregate_.end(), by_chunk[i]->ciphertexts.begin(),
                          by_chunk[i]->ciphertexts.end());
      }
      complete_ = true;
      break;
    }
  }
  return complete_;
}

// ---------------------------------------------------------------------------

struct Coordinator::Member {
  Participant participant;
  AuthToken token{};
  double last_seen = 0;
  bool failed = false;
  std::uint64_t failure_stamp = 0;
};

struct Coordinator::Job {
  mutable std::mutex mu;
  JobConfig config;
  JobStatus status = JobStatus::kForming;
  std::vector<Member> members;     // registration order
  std::vector<Member> eliminated;
  std::optional<RingTopology> topology;

  std::map<std::uint32_t, KeyPair> keys;  // live epochs
  std::set<KeyFingerprint> retired;
  std::uint32_t epoch = 0;
  double last_rotation = 0;

  std::uint32_t next_round_id = 1;
  std::uint32_t round_id = 0;
  std::uint32_t training_round = 0;
  std::uint32_t round_epoch = 0;
  double round_start = 0;
  bool round_open = false;
  std::optional<SubmissionCollector> collector;
  std::uint32_t completed_rounds = 0;
  std::string abort_reason;

  std::vector<JobEvent> events;
  std::vector<RoundRecord> records;
  std::vector<DecryptRecord> audit;
  bool monitor_armed = false;
  std::uint64_t next_stamp = 1;

  Member* find_member(const AuthToken& token) {
    for (Member& m : members) {
      if (constant_time_equal(m.token, token)) return &m;
    }
    return nullptr;
  }
  Member* find_by_name(const std::string& name) {
    for (Member& m : members) {
      if (m.participant.name == name) return &m;
    }
    return nullptr;
  }
  bool any_failed() const {
    return std::any_of(members.begin(), members.end(),
                       [](const Member& m) { return m.failed; });
  }
  std::size_t rank_of(const std::string& name) const {
    if (!topology) return 0;
    return topology->rank_of(name).value_or(0);
  }
};

Coordinator::Coordinator(Transport& transport) : transport_(transport) {}
Coordinator::~Coordinator() = default;

void Coordinator::create_job(JobConfig config) {
  if (config.expected_members < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a job needs at least two members");
  }
  if (config.codec.max_parties < config.expected_members) {
    throw Error(ErrorCode::kInvalidArgument, "codec max_parties below expected members");
  }
  config.codec.validate(config.key_bits);
  if (config.total_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "total_rounds must be >= 1");
  }
  auto job = std::make_unique<Job>();
  job->config = std::move(config);
  std::lock_guard<std::mutex> lock(jobs_mu_);
  JobId id = job->config.job_id;
  if (!jobs_.emplace(id, std::move(job)).second) {
    throw Error(ErrorCode::kDuplicate, "job already exists");
  }
}

Coordinator::Job& Coordinator::job_ref(const JobId& id) const {
  std::lock_guard<std::mutex> lock(jobs_mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown job " + job_id_to_string(id));
  }
  return *it->second;
}

void Coordinator::add_event(Job& job, JobEventKind kind, std::string detail,
                            std::vector<std::size_t> ranks) {
  job.events.push_back(JobEvent{transport_.now(), kind, std::move(detail), std::move(ranks)});
}

void Coordinator::send_to(Job& job, const Member& member, MessageType type,
                          Bytes payload) {
  Frame f{type, job.config.job_id, member.token, std::move(payload)};
  transport_.send(member.participant.endpoint, encode_frame(f));
}

void Coordinator::broadcast_locked(Job& job, MessageType type,
                                   const Bytes& payload, bool include_failed) {
  for (const Member& m : job.members) {
    if (m.failed && !include_failed) continue;
    send_to(job, m, type, payload);
  }
}

void Coordinator::on_frame(ByteView bytes) {
  Frame frame;
  try {
    frame = decode_frame(bytes);
  } catch (const Error&) {
    return;  // unauthenticated garbage; nothing to answer
  }
  Job* job = nullptr;
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    auto it = jobs_.find(frame.job_id);
    if (it == jobs_.end()) return;
    job = it->second.get();
  }
  std::lock_guard<std::mutex> lock(job->mu);
  handle_frame(*job, frame);
}

void Coordinator::handle_frame(Job& job, const Frame& frame) {
  if (frame.type == MessageType::kRegister) {
    RegisterPayload reg;
    try {
      reg = decode_register(frame.payload);
    } catch (const Error&) {
      return;
    }
    RegisterOutcome outcome = register_locked(job, reg.participant, frame.token);
    if (!outcome.accepted && outcome.error != ErrorCode::kAuthFailed) {
      Frame reply{MessageType::kError, job.config.job_id, frame.token,
                  encode(ErrorPayload{outcome.error, outcome.detail})};
      transport_.send(reg.participant.endpoint, encode_frame(reply));
    }
    return;
  }

  Member* member = job.find_member(frame.token);
  if (member == nullptr) {
    for (const Member& gone : job.eliminated) {
      if (constant_time_equal(gone.token, frame.token)) {
        if (frame.type == MessageType::kHeartbeat) {
          send_to(job, gone, MessageType::kError,
                  encode(ErrorPayload{ErrorCode::kAborted, "eliminated from the ring"}));
        }
        return;
      }
    }
    add_event(job, JobEventKind::kAuthFailed,
              std::string("unauthenticated ") + to_string(frame.type));
    return;
  }

  switch (frame.type) {
    case MessageType::kHeartbeat:
      on_heartbeat_locked(job, *member);
      break;
    case MessageType::kAggSubmit:
      member->last_seen = transport_.now();
      on_submission_locked(job, *member, frame);
      break;
    case MessageType::kError:
      member->last_seen = transport_.now();
      try {
        on_learner_error_locked(job, *member, decode_error(frame.payload));
      } catch (const Error&) {
      }
      break;
    case MessageType::kPause: {
      member->last_seen = transport_.now();
      try {
        PausePayload p = decode_pause(frame.payload);
        if (p.round == job.round_id && job.round_open) {
          add_event(job, JobEventKind::kLearnerStalled,
                    member->participant.name + ": " + p.reason,
                    {job.rank_of(member->participant.name)});
        }
      } catch (const Error&) {
      }
      break;
    }
    default:
      break;
  }
}

Coordinator::RegisterOutcome Coordinator::register_participant(
    const JobId& id, const Participant& participant, const AuthToken& token) {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  return register_locked(job, participant, token);
}

Coordinator::RegisterOutcome Coordinator::register_locked(
    Job& job, const Participant& participant, const AuthToken& token) {
  RegisterOutcome out;
  auto reject = [&](ErrorCode code, std::string detail) {
    out.error = code;
    out.detail = std::move(detail);
    add_event(job, JobEventKind::kRejected, participant.name + ": " + out.detail);
    return out;
  };
  auto expected = job.config.tokens.find(participant.name);
  if (expected == job.config.tokens.end() ||
      !constant_time_equal(expected->second, token)) {
    return reject(ErrorCode::kAuthFailed, "unknown participant or bad token");
  }
  if (job.status != JobStatus::kForming) {
    return reject(ErrorCode::kBadState,
                  std::string("job is ") + to_string(job.status) + ", not forming");
  }
  if (participant.name.empty()) {
    return reject(ErrorCode::kInvalidArgument, "empty participant name");
  }
  if (job.find_by_name(participant.name) != nullptr) {
    return reject(ErrorCode::kDuplicate, "name '" + participant.name + "' already registered");
  }
  Member m;
  m.participant = participant;
  m.token = token;
  m.last_seen = transport_.now();
  job.members.push_back(std::move(m));
  add_event(job, JobEventKind::kRegistered, participant.name);
  out.accepted = true;
  if (job.members.size() == job.config.expected_members) {
    start_job_locked(job);
    out.job_started = true;
  }
  return out;
}

void Coordinator::start_job_locked(Job& job) {
  std::vector<Participant> ps;
  for (const Member& m : job.members) ps.push_back(m.participant);
  job.topology = build_ring(ps, job.config.strategy);
  send_topology_locked(job);
  rotate_locked(job);
  job.status = JobStatus::kRunning;
  add_event(job, JobEventKind::kStarted,
            "P=" + std::to_string(job.topology->size()));
  start_round_locked(job, 1);
  if (!job.monitor_armed) {
    job.monitor_armed = true;
    JobId id = job.config.job_id;
    transport_.call_after(job.config.heartbeat.interval_s, [this, id] { monitor_tick(id); });
  }
}

void Coordinator::send_topology_locked(Job& job) {
  TopologyAssignPayload payload;
  payload.protocol = job.config.protocol;
  payload.strategy = job.config.strategy;
  payload.codec = job.config.codec;
  payload.total_rounds = job.config.total_rounds;
  for (const Participant& p : job.topology->participants()) {
    Member* m = job.find_by_name(p.name);
    payload.members.push_back(
        TopologyMember{p, token_digest(peer_credential(m->token))});
  }
  for (std::size_t rank = 1; rank <= job.topology->size(); ++rank) {
    payload.your_rank = static_cast<std::uint16_t>(rank);
    Member* m = job.find_by_name(job.topology->at_rank(rank).name);
    send_to(job, *m, MessageType::kTopologyAssign, encode(payload));
  }
}

void Coordinator::rotate_locked(Job& job) {
  std::uint32_t epoch = job.epoch + 1;
  KeyPair kp = job.config.key_seed
                   ? generate_keypair(job.config.key_bits,
                                      epoch_key_seed(*job.config.key_seed, epoch))
                   : generate_keypair(job.config.key_bits);
  Bytes pk_bytes = kp.public_key.serialize();
  job.keys.emplace(epoch, std::move(kp));
  job.epoch = epoch;
  job.last_rotation = transport_.now();
  add_event(job, JobEventKind::kKeyRotated, "epoch " + std::to_string(epoch));
  broadcast_locked(job, MessageType::kPubkey, encode(PubkeyPayload{epoch, pk_bytes}),
                   /*include_failed=*/true);
}

std::uint32_t Coordinator::rotate_keys(const JobId& id) {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  if (job.status != JobStatus::kRunning && job.status != JobStatus::kPaused) {
    throw Error(ErrorCode::kBadState,
                std::string("cannot rotate keys while job is ") + to_string(job.status));
  }
  rotate_locked(job);
  return job.epoch;
}

void Coordinator::start_round_locked(Job& job, std::uint32_t training_round) {
  job.round_id = job.next_round_id++;
  job.training_round = training_round;
  job.round_epoch = job.epoch;
  job.round_start = transport_.now();
  job.round_open = true;
  // Older epochs have no round left in flight.
  for (auto it = job.keys.begin(); it != job.keys.end();) {
    if (it->first < job.round_epoch) {
      job.retired.insert(it->second.public_key.fingerprint());
      it = job.keys.erase(it);
    } else {
      ++it;
    }
  }
  job.collector.emplace(job.config.protocol, job.topology->size(),
                        job.config.vector_length, job.round_id);
  add_event(job, JobEventKind::kRoundStarted,
            "round " + std::to_string(job.round_id) + " (training round " +
                std::to_string(training_round) + ", P=" +
                std::to_string(job.topology->size()) + ")");
  broadcast_locked(job, MessageType::kResume,
                   encode(ResumePayload{job.round_id, training_round, job.round_epoch}));
}

void Coordinator::on_submission_locked(Job& job, Member& member,
                                       const Frame& frame) {
  if (job.status != JobStatus::kRunning || !job.round_open) return;
  const std::size_t rank = job.rank_of(member.participant.name);
  auto reply_error = [&](ErrorCode code, const std::string& detail) {
    send_to(job, member, MessageType::kError, encode(ErrorPayload{code, detail}));
  };

  KeyFingerprint fp;
  try {
    fp = peek_submission_key(frame.payload);
  } catch (const Error& e) {
    reply_error(e.code(), e.what());
    return;
  }
  auto round_key = job.keys.find(job.round_epoch);
  if (job.retired.count(fp) != 0 ||
      (round_key != job.keys.end() && fp != round_key->second.public_key.fingerprint() &&
       std::any_of(job.keys.begin(), job.keys.end(), [&](const auto& kv) {
         return kv.second.public_key.fingerprint() == fp;
       }))) {
    add_event(job, JobEventKind::kStaleEpoch,
              member.participant.name + " submitted under a retired key", {rank});
    reply_error(ErrorCode::kStaleEpoch, "key epoch no longer accepted");
    return;
  }
  if (round_key == job.keys.end() || fp != round_key->second.public_key.fingerprint()) {
    reply_error(ErrorCode::kKeyMismatch, "unknown key fingerprint");
    return;
  }
  const KeyPair& kp = round_key->second;

  AggregateSubmission sub;
  try {
    sub = decode_submission(frame.payload, kp.public_key);
  } catch (const Error& e) {
    reply_error(e.code(), e.what());
    return;
  }
  if (sub.message.round != job.round_id) return;  // interrupted attempt
  if (sub.message.sender_rank != rank) {
    reply_error(ErrorCode::kWrongSender, "sender rank does not match credentials");
    return;
  }
  try {
    if (!job.collector->add(sub.message, kp.public_key)) return;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDivergentSubmission) {
      add_event(job, JobEventKind::kRoundFailed, e.what(), job.collector->divergent_ranks());
      abort_locked(job, e.what());
      return;
    }
    reply_error(e.code(), e.what());
    return;
  }
  finish_round_locked(job);
}

void Coordinator::finish_round_locked(Job& job) {
  const KeyPair& kp = job.keys.at(job.round_epoch);
  RoundRecord rec;
  rec.round = job.round_id;
  rec.training_round = job.training_round;
  rec.protocol = job.config.protocol;
  rec.parties = job.topology->size();
  rec.epoch = job.round_epoch;
  rec.start_time = job.round_start;
  rec.submitted_time = transport_.now();

  std::vector<mpz_class> residues;
  {
    CpuTimer timer(rec.decrypt_cpu_s);
    residues = decrypt_vector(kp.private_key, job.collector->aggregate());
  }
  job.audit.push_back(DecryptRecord{job.round_id, job.config.protocol, rec.parties,
                                    job.collector->submitters(), residues.size()});
  rec.average = decode_sum(job.config.codec, kp.public_key.n(), residues,
                           static_cast<unsigned>(rec.parties));
  job.round_open = false;
  broadcast_locked(job, MessageType::kResult,
                   encode(ResultPayload{job.round_id, job.training_round, rec.average}));
  rec.result_sent_time = transport_.now();
  job.records.push_back(rec);
  ++job.completed_rounds;
  add_event(job, JobEventKind::kRoundCompleted,
            "round " + std::to_string(job.round_id) + " (training round " +
                std::to_string(job.training_round) + ", P=" + std::to_string(rec.parties) + ")");

  if (job.training_round >= job.config.total_rounds) {
    job.status = JobStatus::kCompleted;
    add_event(job, JobEventKind::kCompleted, "");
    return;
  }
  const RotationPolicy& policy = job.config.rotation;
  bool rotate = false;
  if (policy.kind == RotationPolicy::Kind::kPerEpoch) {
    rotate = policy.rounds_per_epoch > 0 &&
             job.completed_rounds % policy.rounds_per_epoch == 0;
  } else if (policy.kind == RotationPolicy::Kind::kEveryHMinutes) {
    rotate = transport_.now() - job.last_rotation >= policy.minutes * 60.0;
  }
  if (rotate) rotate_locked(job);
  start_round_locked(job, job.training_round + 1);
}

void Coordinator::on_learner_error_locked(Job& job, Member& member,
                                          const ErrorPayload& err) {
  if (job.status != JobStatus::kRunning) return;
  const std::size_t rank = job.rank_of(member.participant.name);
  if (err.code == ErrorCode::kRedFlag) {
    std::vector<std::size_t> ranks = parse_trailing_ranks(err.detail);
    add_event(job, JobEventKind::kRedFlag,
              "reported by rank " + std::to_string(rank) + ": " + err.detail, ranks);
    add_event(job, JobEventKind::kRoundFailed, "collusion red flag", ranks);
    abort_locked(job, "collusion red flag: " + err.detail);
    return;
  }
  add_event(job, JobEventKind::kRoundFailed,
            "rank " + std::to_string(rank) + " reported " + to_string(err.code) + ": " +
                err.detail,
            {rank});
  abort_locked(job, err.detail);
}

void Coordinator::on_heartbeat_locked(Job& job, Member& member) {
  member.last_seen = transport_.now();
  if (!member.failed) return;
  member.failed = false;
  add_event(job, JobEventKind::kReconnected, member.participant.name,
            {job.rank_of(member.participant.name)});
  if (job.status == JobStatus::kPaused && !job.any_failed()) {
    job.status = JobStatus::kRunning;
    add_event(job, JobEventKind::kResumed, "same topology");
    start_round_locked(job, job.training_round);
  }
}

void Coordinator::monitor_tick(const JobId& id) {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  if (job.status == JobStatus::kCompleted || job.status == JobStatus::kAborted) {
    job.monitor_armed = false;
    return;
  }
  const HeartbeatConfig& hb = job.config.heartbeat;
  const double now = transport_.now();
  bool newly_failed = false;
  for (Member& m : job.members) {
    if (m.failed) continue;
    if (now - m.last_seen > hb.max_missed * hb.interval_s) {
      m.failed = true;
      m.failure_stamp = job.next_stamp++;
      newly_failed = true;
      add_event(job, JobEventKind::kMemberFailed, m.participant.name,
                {job.rank_of(m.participant.name)});
      std::string name = m.participant.name;
      std::uint64_t stamp = m.failure_stamp;
      transport_.call_after(hb.grace_s, [this, id, name, stamp] {
        grace_expired(id, name, stamp);
      });
    }
  }
  if (newly_failed && job.status == JobStatus::kRunning) {
    job.status = JobStatus::kPaused;
    job.round_open = false;  // partial aggregates are discarded, never spliced
    add_event(job, JobEventKind::kPaused, "round " + std::to_string(job.round_id));
    broadcast_locked(job, MessageType::kPause,
                     encode(PausePayload{job.round_id, "member unresponsive"}));
  }
  transport_.call_after(hb.interval_s, [this, id] { monitor_tick(id); });
}

void Coordinator::grace_expired(const JobId& id, const std::string& name,
                                std::uint64_t stamp) {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  if (job.status == JobStatus::kCompleted || job.status == JobStatus::kAborted) return;
  auto it = std::find_if(job.members.begin(), job.members.end(), [&](const Member& m) {
    return m.participant.name == name;
  });
  if (it == job.members.end() || !it->failed || it->failure_stamp != stamp) return;

  std::size_t rank = job.rank_of(name);
  job.eliminated.push_back(*it);
  job.members.erase(it);
  add_event(job, JobEventKind::kEliminated, name, {rank});
  if (job.members.size() < 2) {
    abort_locked(job, "ring cannot be rebuilt with fewer than two learners");
    return;
  }
  if (job.any_failed()) return;  // wait for the other grace timers

  std::vector<Participant> survivors;
  for (const Member& m : job.members) survivors.push_back(m.participant);
  job.config.expected_members = static_cast<std::uint32_t>(survivors.size());
  job.topology = build_ring(survivors, job.config.strategy);
  add_event(job, JobEventKind::kRebuilt, "P=" + std::to_string(job.topology->size()));
  send_topology_locked(job);
  job.status = JobStatus::kRunning;
  add_event(job, JobEventKind::kResumed, "rebuilt topology");
  start_round_locked(job, job.training_round);
}

void Coordinator::abort_locked(Job& job, const std::string& reason) {
  job.status = JobStatus::kAborted;
  job.abort_reason = reason;
  job.round_open = false;
  add_event(job, JobEventKind::kAborted, reason);
  broadcast_locked(job, MessageType::kError, encode(ErrorPayload{ErrorCode::kAborted, reason}));
}

JobState Coordinator::state(const JobId& id) const {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  JobState s;
  s.job_id = job.config.job_id;
  s.expected_members = job.config.expected_members;
  for (const Member& m : job.members) s.registered.push_back(m.participant);
  s.protocol = job.config.protocol;
  s.topology = job.topology;
  s.key_epoch = job.epoch;
  if (auto it = job.keys.find(job.epoch); it != job.keys.end()) {
    s.public_key = it->second.public_key;
  }
  s.rotation_policy = job.config.rotation;
  s.status = job.status;
  s.current_round = job.round_id;
  s.current_training_round = job.training_round;
  s.completed_rounds = job.completed_rounds;
  s.abort_reason = job.abort_reason;
  return s;
}

std::vector<JobEvent> Coordinator::events(const JobId& id) const {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  return job.events;
}

std::vector<RoundRecord> Coordinator::round_records(const JobId& id) const {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  return job.records;
}

std::vector<DecryptRecord> Coordinator::decrypt_audit(const JobId& id) const {
  Job& job = job_ref(id);
  std::lock_guard<std::mutex> lock(job.mu);
  return job.audit;
}

}  // namespace secagg
