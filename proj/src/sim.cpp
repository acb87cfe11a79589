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

#include "secagg/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace secagg {

// ---------------------------------------------------------------------------
// SimNetwork

class SimNetwork::Node final : public Transport {
 public:
  Node(SimNetwork& net, std::string endpoint) : net_(net), endpoint_(std::move(endpoint)) {}

  double send(const std::string& endpoint, Bytes frame) override {
    return net_.send(endpoint_, endpoint, std::move(frame));
  }
  double now() const override { return net_.now(); }
  void call_after(double delay_s, std::function<void()> fn) override {
    net_.schedule(net_.now() + std::max(0.0, delay_s), std::move(fn));
  }
  const std::string& local_endpoint() const override { return endpoint_; }

  FrameHandler* handler = nullptr;

 private:
  SimNetwork& net_;
  std::string endpoint_;
};

SimNetwork::SimNetwork(LinkModel link) : link_(link) {
  if (link.latency_s < 0 || link.bandwidth_Bps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "latency and bandwidth must be non-negative");
  }
}

SimNetwork::~SimNetwork() = default;

Transport& SimNetwork::attach(const std::string& endpoint) {
  auto& slot = nodes_[endpoint];
  if (!slot) slot = std::make_unique<Node>(*this, endpoint);
  return *slot;
}

void SimNetwork::set_handler(const std::string& endpoint, FrameHandler* handler) {
  auto it = nodes_.find(endpoint);
  if (it == nodes_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown node " + endpoint);
  it->second->handler = handler;
}

void SimNetwork::schedule(double at, std::function<void()> fn) {
  queue_.push(Event{std::max(at, now_), seq_++, std::move(fn)});
}

double SimNetwork::send(const std::string& from, const std::string& to, Bytes frame) {
  double& nic = nic_free_[from];
  const double departure = std::max(now_, nic);
  const double wire =
      link_.bandwidth_Bps > 0 ? static_cast<double>(frame.size()) / link_.bandwidth_Bps : 0.0;
  nic = departure + wire;
  const double arrival = departure + wire + link_.latency_s;
  ++frames_sent_;
  if (record_transcript) transcript_.push_back(TranscriptEntry{now_, arrival, from, to, frame});

  auto shared = std::make_shared<Bytes>(std::move(frame));
  schedule(arrival, [this, to, shared] {
    auto it = nodes_.find(to);
    if (it == nodes_.end() || it->second->handler == nullptr) return;
    it->second->handler->on_frame(*shared);
  });
  return arrival;
}

bool SimNetwork::step() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  ev.fn();
  return true;
}

void SimNetwork::run(double until, const std::function<bool()>& stop) {
  while (!queue_.empty() && queue_.top().time <= until) {
    step();
    if (stop && stop()) return;
  }
}

// ---------------------------------------------------------------------------
// Scenario

const char* to_string(CollusionMode m) {
  return m == CollusionMode::kPassThrough ? "pass_through" : "duplicate_ciphertext";
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    unsigned long long x = std::stoull(v, &used, 0);
    if (used != v.size() || v.front() == '-') bad(key + ": not an unsigned integer");
    return x;
  } catch (const std::logic_error&) {
    bad(key + ": not an unsigned integer: '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) bad(key + ": not a number");
    return x;
  } catch (const std::logic_error&) {
    bad(key + ": not a number: '" + v + "'");
  }
}

CollusionMode parse_collusion_mode(std::string m) {
  std::transform(m.begin(), m.end(), m.begin(), [](unsigned char c) { return std::tolower(c); });
  if (m == "pass_through" || m == "passthrough" || m == "pass-through") {
    return CollusionMode::kPassThrough;
  }
  if (m == "duplicate_ciphertext" || m == "duplicate" || m == "duplicate-ciphertext") {
    return CollusionMode::kDuplicateCiphertext;
  }
  bad("unknown collusion mode '" + m + "'");
}

TransformTiming parse_transform(const std::string& v) {
  if (v == "measured") return TransformTiming::kMeasured;
  if (v == "zero") return TransformTiming::kZero;
  bad("transform must be 'measured' or 'zero'");
}

RotationPolicy parse_rotation(const std::string& v) {
  RotationPolicy r;
  auto parts = split(v, ':');
  if (parts[0] == "per_job" && parts.size() == 1) {
    r.kind = RotationPolicy::Kind::kPerJob;
  } else if (parts[0] == "per_epoch" && parts.size() <= 2) {
    r.kind = RotationPolicy::Kind::kPerEpoch;
    if (parts.size() == 2) r.rounds_per_epoch = static_cast<std::uint32_t>(to_u64("rotation", parts[1]));
    if (r.rounds_per_epoch == 0) bad("rotation: rounds per epoch must be >= 1");
  } else if (parts[0] == "minutes" && parts.size() == 2) {
    r.kind = RotationPolicy::Kind::kEveryHMinutes;
    r.minutes = to_double("rotation", parts[1]);
    if (!(r.minutes > 0)) bad("rotation: minutes must be positive");
  } else {
    bad("rotation must be per_job, per_epoch[:N] or minutes:H");
  }
  return r;
}

// "round:rank:step" or "round:rank:step:recover_after_s"
FailureSpec parse_failure(const std::string& v) {
  auto parts = split(v, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    bad("failure must be round:rank:step[:recover_after_s]");
  }
  FailureSpec f;
  f.round = static_cast<std::uint32_t>(to_u64("failure", parts[0]));
  f.rank = to_u64("failure", parts[1]);
  f.fail_at_step = to_u64("failure", parts[2]);
  if (parts.size() == 4) f.recover_after_s = to_double("failure", parts[3]);
  return f;
}

// "mode:r1,r2,..."
CollusionPlan parse_collusion(const std::string& v) {
  auto colon = v.find(':');
  if (colon == std::string::npos) bad("collusion must be mode:rank,rank,...");
  CollusionPlan plan;
  plan.mode = parse_collusion_mode(trim(v.substr(0, colon)));
  for (const std::string& r : split(v.substr(colon + 1), ',')) {
    plan.ranks.push_back(to_u64("collusion", r));
  }
  return plan;
}

void apply_key(Scenario& s, const std::string& key, const std::string& value) {
  if (key == "parties") {
    s.parties = to_u64(key, value);
  } else if (key == "protocol") {
    s.protocol = parse_protocol(value);
  } else if (key == "vector_length") {
    s.vector_length = to_u64(key, value);
  } else if (key == "key_bits") {
    s.key_bits = static_cast<unsigned>(to_u64(key, value));
  } else if (key == "rounds") {
    s.rounds = static_cast<std::uint32_t>(to_u64(key, value));
  } else if (key == "latency_ms" || key == "link_latency") {
    s.latency_ms = to_double(key, value);
  } else if (key == "bandwidth") {
    s.bandwidth = to_double(key, value);
  } else if (key == "seed") {
    s.seed = to_u64(key, value);
  } else if (key == "strategy") {
    s.strategy = parse_ring_strategy(value);
  } else if (key == "scale_bits") {
    s.codec.scale_bits = static_cast<unsigned>(to_u64(key, value));
  } else if (key == "max_parties") {
    s.codec.max_parties = static_cast<unsigned>(to_u64(key, value));
  } else if (key == "magnitude_bound") {
    s.codec.magnitude_bound = to_double(key, value);
  } else if (key == "transform") {
    s.transform = parse_transform(value);
  } else if (key == "rotation") {
    s.rotation = parse_rotation(value);
  } else if (key == "heartbeat_interval_s") {
    s.heartbeat.interval_s = to_double(key, value);
  } else if (key == "grace_s") {
    s.heartbeat.grace_s = to_double(key, value);
  } else if (key == "failure") {
    s.failure_plan.push_back(parse_failure(value));
  } else if (key == "collusion") {
    s.collusion_plan = parse_collusion(value);
  } else if (key == "transcript") {
    if (value != "on" && value != "off") bad("transcript must be 'on' or 'off'");
    s.record_transcript = value == "on";
  } else {
    bad("unknown scenario key '" + key + "'");
  }
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "on" : "off";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  bad("expected a scalar, got " + std::string(v.type_name()));
}

Scenario parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("scenario JSON must be an object");
  Scenario s;
  for (const auto& [key, value] : doc.items()) {
    if (key == "failure_plan") {
      if (!value.is_array()) bad("failure_plan must be an array");
      for (const auto& f : value) {
        FailureSpec spec;
        spec.round = f.at("round").get<std::uint32_t>();
        spec.rank = f.at("rank").get<std::size_t>();
        spec.fail_at_step = f.value("fail_at_step", std::size_t{0});
        if (f.contains("recover_after_s")) spec.recover_after_s = f["recover_after_s"].get<double>();
        s.failure_plan.push_back(spec);
      }
    } else if (key == "collusion_plan") {
      if (value.is_null()) continue;
      CollusionPlan plan;
      plan.mode = parse_collusion_mode(value.at("mode").get<std::string>());
      plan.ranks = value.at("ranks").get<std::vector<std::size_t>>();
      s.collusion_plan = plan;
    } else {
      apply_key(s, key, json_scalar(value));
    }
  }
  return s;
}

}  // namespace

void Scenario::validate() const {
  if (parties < 2) bad("parties must be >= 2");
  if (parties > codec.max_parties) bad("parties exceeds codec max_parties");
  if (vector_length < 1) bad("vector_length must be >= 1");
  if (rounds < 1) bad("rounds must be >= 1");
  if (latency_ms < 0 || bandwidth < 0) bad("latency and bandwidth must be non-negative");
  codec.validate(key_bits);
  for (const FailureSpec& f : failure_plan) {
    if (f.rank < 1 || f.rank > parties) {
      bad("failure_plan rank " + std::to_string(f.rank) + " outside 1.." + std::to_string(parties));
    }
    if (f.round < 1 || f.round > rounds) bad("failure_plan round outside the scenario");
    // A ring learner sends one message per round; the others send P - 1
    // peer messages and one submission.
    const std::size_t sends = protocol == Protocol::kRing ? 1 : parties;
    if (f.fail_at_step >= sends) {
      bad("failure_plan fail_at_step " + std::to_string(f.fail_at_step) + " is never reached; " +
          to_string(protocol) + " learners send " + std::to_string(sends) + " message(s) per round");
    }
  }
  if (collusion_plan) {
    std::set<std::size_t> seen;
    for (std::size_t r : collusion_plan->ranks) {
      if (r < 1 || r > parties) bad("collusion rank outside 1.." + std::to_string(parties));
      if (!seen.insert(r).second) bad("collusion rank listed twice");
    }
    if (collusion_plan->ranks.empty()) bad("collusion plan names no ranks");
    if (collusion_plan->ranks.size() >= parties) bad("collusion plan leaves no honest learner");
    if (collusion_plan->mode == CollusionMode::kDuplicateCiphertext &&
        collusion_plan->ranks.size() < 2) {
      bad("duplicate_ciphertext needs at least two colluders");
    }
    if (collusion_plan->mode == CollusionMode::kPassThrough && vector_length < parties) {
      bad("pass_through analysis needs vector_length >= parties");
    }
  }
}

Scenario Scenario::parse(std::string_view text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '{') return parse_json(t);
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) bad("line " + std::to_string(line_no) + ": expected key = value");
    apply_key(s, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Reports

void write_report(std::ostream& out, std::vector<ReportRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    std::string pa = to_string(a.protocol), pb = to_string(b.protocol);
    return std::tie(a.parties, pa, a.round) < std::tie(b.parties, pb, b.round);
  });
  out << "parties,protocol,round,comm_time_s,transform_time_s,total_sync_time_s\n";
  char buf[160];
  for (const ReportRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%s,%u,%.9f,%.9f,%.9f\n", r.parties,
                  to_string(r.protocol), r.round, r.comm_time_s, r.transform_time_s,
                  r.total_sync_time_s);
    out << buf;
  }
}

void emit_report(const std::string& path, const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "report has no rows");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_report(f, rows);
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, "write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// Cluster

RandomGradientSource::RandomGradientSource(const Seed& seed, std::size_t length)
    : seed_(seed), length_(length) {}

std::vector<double> RandomGradientSource::gradient(std::uint32_t training_round) {
  SeededRandom rng(derive_seed(seed_, "round-" + std::to_string(training_round)));
  std::vector<double> out(length_);
  for (double& v : out) {
    v = static_cast<double>(rng.next_u64() >> 11) * 0x1p-52 - 1.0;
  }
  return out;
}

std::string SimCluster::learner_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "learner-%02zu", index);
  return buf;
}

SimCluster::SimCluster(Scenario scenario, std::vector<std::unique_ptr<GradientSource>> sources)
    : scenario_(std::move(scenario)) {
  scenario_.validate();
  const Seed root = derive_seed("secagg-sim", scenario_.seed);
  const Seed job_seed = derive_seed(root, "job");
  std::copy_n(job_seed.begin(), job_id_.size(), job_id_.begin());

  network_ = std::make_unique<SimNetwork>(
      LinkModel{scenario_.latency_ms * 1e-3, scenario_.bandwidth});
  network_->record_transcript = scenario_.record_transcript;

  std::vector<Participant> participants;
  for (std::size_t i = 1; i <= scenario_.parties; ++i) {
    Participant p;
    p.name = learner_name(i);
    p.endpoint = p.name;
    if (scenario_.strategy == RingStrategy::kLocationGrouped) {
      p.location_tag = "zone-" + std::to_string(i % 2);
    }
    participants.push_back(p);
  }
  initial_ring_ = build_ring(participants, scenario_.strategy);

  JobConfig job;
  job.job_id = job_id_;
  job.expected_members = static_cast<std::uint32_t>(scenario_.parties);
  job.protocol = scenario_.protocol;
  job.strategy = scenario_.strategy;
  job.key_bits = scenario_.key_bits;
  job.codec = scenario_.codec;
  job.total_rounds = scenario_.rounds;
  job.rotation = scenario_.rotation;
  job.heartbeat = scenario_.heartbeat;
  job.vector_length = scenario_.vector_length;
  job.key_seed = derive_seed(root, "keys");
  for (const Participant& p : participants) {
    job.tokens[p.name] = derive_seed(root, "token-" + p.name);
  }

  Transport& coord_net = network_->attach("coordinator");
  coordinator_ = std::make_unique<Coordinator>(coord_net);
  coordinator_->create_job(job);
  network_->set_handler("coordinator", coordinator_.get());

  sources.resize(scenario_.parties);
  sources_ = std::move(sources);
  const Contribution honest{};
  for (std::size_t rank = 1; rank <= scenario_.parties; ++rank) {
    const Participant& p = initial_ring_->at_rank(rank);
    if (!sources_[rank - 1]) {
      sources_[rank - 1] = std::make_unique<RandomGradientSource>(
          derive_seed(root, "gradient-" + p.name), scenario_.vector_length);
    }
    rngs_.push_back(std::make_unique<SeededRandom>(derive_seed(root, "rng-" + p.name)));

    LearnerConfig cfg;
    cfg.name = p.name;
    cfg.endpoint = p.endpoint;
    cfg.location_tag = p.location_tag;
    cfg.job_id = job_id_;
    cfg.token = job.tokens[p.name];
    Transport& t = network_->attach(p.endpoint);
    auto learner = std::make_unique<LearnerClient>(cfg, t, *sources_[rank - 1], *rngs_.back());
    learner->heartbeat_interval_s = scenario_.heartbeat.interval_s;
    learner->measure_transform = scenario_.transform == TransformTiming::kMeasured;

    if (const auto& plan = scenario_.collusion_plan) {
      if (std::find(plan->ranks.begin(), plan->ranks.end(), rank) != plan->ranks.end()) {
        Contribution c;
        c.add_own = false;
        if (plan->mode == CollusionMode::kDuplicateCiphertext) {
          c.shared_nonce_seed = derive_seed(root, "collusion");
        }
        learner->set_contribution(c);
      } else {
        learner->set_contribution(honest);
      }
    }
    for (const FailureSpec& f : scenario_.failure_plan) {
      if (f.rank == rank) learner->set_fail_plan(FailPlan{f.round, f.fail_at_step, f.recover_after_s});
    }
    network_->set_handler(p.endpoint, learner.get());
    learners_.push_back(std::move(learner));
  }
}

SimCluster::~SimCluster() = default;

LearnerClient& SimCluster::learner_at_initial_rank(std::size_t rank) {
  return *learners_.at(rank - 1);
}

GradientSource& SimCluster::source_at_initial_rank(std::size_t rank) {
  return *sources_.at(rank - 1);
}

void SimCluster::run() {
  for (auto& l : learners_) l->start();
  // Generous bound on virtual time; a healthy job drains its queue long before.
  const double limit = 3600.0 * std::max<std::uint32_t>(1, scenario_.rounds);
  network_->run(limit);
}

std::vector<ReportRow> SimCluster::report() const {
  const bool measured = scenario_.transform == TransformTiming::kMeasured;
  std::vector<ReportRow> rows;
  for (const RoundRecord& rec : coordinator_->round_records(job_id_)) {
    double max_comm = 0, max_transform = 0, max_sum = 0, last_result = rec.result_sent_time;
    for (const auto& l : learners_) {
      for (const LearnerRoundTiming& t : l->timings()) {
        if (t.round != rec.round) continue;
        const double comm = std::max(0.0, t.last_delivery_time - t.start_time);
        max_comm = std::max(max_comm, comm);
        max_transform = std::max(max_transform, t.transform_cpu_s);
        max_sum = std::max(max_sum, comm + t.transform_cpu_s);
        last_result = std::max(last_result, t.result_time);
      }
    }
    const double distribution = last_result - rec.result_sent_time;
    const double decrypt = measured ? rec.decrypt_cpu_s : 0.0;
    ReportRow row;
    row.parties = rec.parties;
    row.protocol = rec.protocol;
    row.round = rec.training_round;
    row.comm_time_s = max_comm + distribution;
    row.transform_time_s = max_transform + decrypt;
    row.total_sync_time_s = max_sum + decrypt + distribution;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Analysis

std::vector<ScanFinding> scan_transcript(const std::vector<TranscriptEntry>& transcript,
                                         const std::vector<Needle>& needles) {
  std::vector<ScanFinding> findings;
  for (std::size_t idx = 0; idx < transcript.size(); ++idx) {
    const Bytes& f = transcript[idx].frame;
    // Unmasked [begin, end) ranges of the frame.
    std::vector<std::pair<std::size_t, std::size_t>> open{{0, f.size()}};
    if (f.size() >= kFrameHeaderBytes) {
      auto type = static_cast<MessageType>(f[4]);
      std::size_t agg = kFrameHeaderBytes;
      if (type == MessageType::kAggSubmit) agg += sizeof(KeyFingerprint);
      if ((type == MessageType::kAggMsg || type == MessageType::kAggSubmit) &&
          f.size() >= agg + kAggregateHeaderBytes) {
        ByteReader r(ByteView(f).subspan(agg + 11, 4));
        const std::uint32_t count = r.u32();
        const std::size_t ct_begin = agg + kAggregateHeaderBytes;
        if (count > 0) {
          open = {{0, ct_begin}};
          // Ciphertexts run to the end of the frame.
        }
      }
    }
    for (const Needle& n : needles) {
      if (n.bytes.empty()) continue;
      for (auto [b, e] : open) {
        auto first = f.begin() + static_cast<std::ptrdiff_t>(b);
        auto last = f.begin() + static_cast<std::ptrdiff_t>(e);
        for (auto it = std::search(first, last, n.bytes.begin(), n.bytes.end()); it != last;
             it = std::search(it + 1, last, n.bytes.begin(), n.bytes.end())) {
          findings.push_back(
              ScanFinding{idx, static_cast<std::size_t>(it - f.begin()), n.label});
        }
      }
    }
  }
  return findings;
}

ExposureAnalysis analyze_pass_through(std::size_t parties,
                                      const std::vector<std::size_t>& colluders,
                                      Protocol protocol, std::uint64_t seed,
                                      unsigned key_bits) {
  Scenario s;
  s.parties = parties;
  s.protocol = protocol;
  s.vector_length = parties;
  s.key_bits = key_bits;
  s.rounds = 1;
  s.seed = seed;
  s.transform = TransformTiming::kZero;
  s.record_transcript = false;
  if (!colluders.empty()) s.collusion_plan = CollusionPlan{colluders, CollusionMode::kPassThrough};

  std::vector<std::unique_ptr<GradientSource>> sources;
  for (std::size_t r = 1; r <= parties; ++r) {
    std::vector<double> e(parties, 0.0);
    e[r - 1] = 1.0;
    sources.push_back(std::make_unique<FixedSource>(std::move(e)));
  }
  SimCluster cluster(s, std::move(sources));
  cluster.run();

  ExposureAnalysis out;
  out.parties = parties;
  out.colluders = colluders;
  auto records = cluster.coordinator().round_records(cluster.job_id());
  if (records.empty()) return out;
  out.completed = true;
  const std::vector<double>& avg = records.back().average;
  for (std::size_t r = 1; r <= parties; ++r) {
    const long long weight = std::llround(avg[r - 1] * static_cast<double>(parties));
    if (weight == 1) out.contributors.insert(r);
  }
  out.isolated = out.contributors.size() == 1;
  return out;
}

namespace {

bool has_event(const std::vector<JobEvent>& events, JobEventKind kind) {
  return std::any_of(events.begin(), events.end(),
                     [&](const JobEvent& e) { return e.kind == kind; });
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario) {
  scenario.validate();
  ScenarioResult result;
  auto fail = [&](std::string what) { result.failed_assertions.push_back(std::move(what)); };

  const bool pass_through = scenario.collusion_plan &&
                            scenario.collusion_plan->mode == CollusionMode::kPassThrough;
  std::vector<std::unique_ptr<GradientSource>> sources;
  if (pass_through) {
    for (std::size_t r = 1; r <= scenario.parties; ++r) {
      std::vector<double> e(scenario.vector_length, 0.0);
      e[r - 1] = 1.0;
      sources.push_back(std::make_unique<FixedSource>(std::move(e)));
    }
  }

  SimCluster cluster(scenario, std::move(sources));
  cluster.run();
  result.rows = cluster.report();
  result.events = cluster.coordinator().events(cluster.job_id());
  result.final_status = cluster.state().status;
  result.transcript = cluster.network().take_transcript();
  for (std::size_t r = 1; r <= scenario.parties; ++r) {
    const auto& flag = cluster.learner_at_initial_rank(r).red_flag();
    if (flag && !result.red_flag) result.red_flag = flag;
  }

  bool abort_expected = false;

  if (!scenario.failure_plan.empty()) {
    std::size_t permanent = 0;
    for (const FailureSpec& f : scenario.failure_plan) permanent += !f.recover_after_s;
    const std::size_t survivors = scenario.parties - permanent;
    if (!has_event(result.events, JobEventKind::kPaused)) fail("job never paused after failure");
    if (permanent == 0) {
      if (!has_event(result.events, JobEventKind::kReconnected)) fail("no reconnection event");
      if (!has_event(result.events, JobEventKind::kResumed)) fail("job never resumed");
    } else if (survivors < 2) {
      abort_expected = true;
      if (result.final_status != JobStatus::kAborted) fail("job with one survivor not aborted");
    } else {
      if (!has_event(result.events, JobEventKind::kRebuilt)) fail("ring never rebuilt");
      bool shrunk_round = std::any_of(result.rows.begin(), result.rows.end(),
                                      [&](const ReportRow& r) { return r.parties == survivors; });
      if (!shrunk_round) fail("no round completed on the rebuilt ring");
    }
    result.notes.push_back("failure: " + std::to_string(permanent) + " permanent, " +
                           std::to_string(survivors) + " survivors");
  }

  if (scenario.collusion_plan) {
    std::vector<std::size_t> planted = scenario.collusion_plan->ranks;
    std::sort(planted.begin(), planted.end());
    if (!pass_through) {
      if (scenario.protocol == Protocol::kBroadcast) {
        abort_expected = true;
        auto it = std::find_if(result.events.begin(), result.events.end(),
                               [](const JobEvent& e) { return e.kind == JobEventKind::kRedFlag; });
        if (it == result.events.end()) {
          fail("red flag did not fire");
        } else if (it->ranks != planted) {
          fail("red flag named " + it->detail + ", planted " + std::to_string(planted.size()) +
               " ranks");
        } else {
          result.notes.push_back("red flag: " + it->detail);
        }
      } else {
        result.notes.push_back(std::string("duplicate ciphertexts are not observable to peers in ") +
                               to_string(scenario.protocol));
      }
    } else {
      auto records = cluster.coordinator().round_records(cluster.job_id());
      if (records.empty()) {
        fail("pass-through round did not complete");
      } else {
        std::set<std::size_t> contributors, honest;
        for (std::size_t r = 1; r <= scenario.parties; ++r) {
          const double w = records.front().average[r - 1] * static_cast<double>(scenario.parties);
          if (std::llround(w) == 1) contributors.insert(r);
          if (!std::binary_search(planted.begin(), planted.end(), r)) honest.insert(r);
        }
        if (contributors != honest) fail("aggregate does not match the honest contributor set");
        const bool isolated = contributors.size() == 1;
        const bool all_others = planted.size() == scenario.parties - 1;
        if (isolated != all_others) fail("isolation without all P-1 colluders");
        result.notes.push_back(isolated ? "pass-through: single honest vector exposed"
                                        : "pass-through: aggregate mixes " +
                                              std::to_string(contributors.size()) +
                                              " honest vectors");
      }
    }
  }

  if (!result.failed_assertions.empty()) {
    result.exit_code = 3;
  } else if (result.final_status != JobStatus::kCompleted && !abort_expected) {
    result.exit_code = 2;
  } else {
    result.exit_code = 0;
  }
  return result;
}

}  // namespace secagg
