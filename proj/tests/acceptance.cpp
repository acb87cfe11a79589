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

// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// pass criterion names (C1..C8) on the command line to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "secagg/codec.hpp"
#include "secagg/learner.hpp"
#include "secagg/paillier.hpp"
#include "secagg/sim.hpp"

using namespace secagg;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double uniform(RandomSource& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng.next_u64() >> 11) * 0x1p-53;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- C1 -----------------------------------------------------------------

Verdict crypto_correctness() {
  Verdict v;
  SeededRandom rng(derive_seed("acceptance/c1", 1));
  const KeyPair kp = generate_keypair(512, rng);
  const PublicKey& pk = kp.public_key;
  const mpz_class& n = pk.n();
  const mpz_class& n2 = pk.n_squared();

  for (int i = 0; i < 1000; ++i) {
    const mpz_class m = rng.uniform_below(n);
    const Ciphertext c = encrypt(pk, m, rng);
    if (decrypt(kp.private_key, c) != m) return v.fail("round-trip mismatch"), v;
    if (decrypt_textbook(kp.private_key, c) != m) return v.fail("textbook mismatch"), v;
  }

  for (int i = 0; i < 1000; ++i) {
    const mpz_class a = rng.uniform_below(n), b = rng.uniform_below(n);
    mpz_class r;
    do r = rng.uniform_below(n); while (r == 0 || gcd(r, n) != 1);
    // Independent encryption formula as oracle for the library's encrypt.
    mpz_class rn;
    mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), n2.get_mpz_t());
    const mpz_class oracle = ((1 + a * n) * rn) % n2;
    const Ciphertext ca = encrypt(pk, a, r);
    if (ca.value() != oracle) return v.fail("encryption differs from formula"), v;
    const Ciphertext cb = encrypt(pk, b, rng);
    const mpz_class want = (a + b) % n;
    if (decrypt(kp.private_key, add_ciphertexts(pk, ca, cb)) != want) {
      return v.fail("homomorphic sum mismatch"), v;
    }
  }

  // CRT against textbook on arbitrary units of Z_{n^2}, not only fresh encryptions.
  for (int i = 0; i < 1000; ++i) {
    mpz_class c;
    do c = rng.uniform_below(n2); while (c == 0 || gcd(c, n) != 1);
    const Ciphertext ct(c, pk.fingerprint());
    if (decrypt(kp.private_key, ct) != decrypt_textbook(kp.private_key, ct)) {
      return v.fail("CRT differs from textbook"), v;
    }
  }
  v.detail = "1000 round-trips, 1000 sums, 1000 CRT/textbook pairs";
  return v;
}

// ---- C2 -----------------------------------------------------------------

// Trains like LinearRegressionSource and keeps the parameter history.
class RecordingSource final : public GradientSource {
 public:
  RecordingSource(std::vector<double> theta, Batch batch, double lr)
      : inner_(std::move(theta), std::move(batch), lr) {}

  std::vector<double> gradient(std::uint32_t round) override { return inner_.gradient(round); }
  void apply(std::uint32_t round, std::span<const double> average) override {
    averages.emplace_back(average.begin(), average.end());
    inner_.apply(round, average);
    history.push_back(inner_.theta());
  }

  std::vector<std::vector<double>> averages;
  std::vector<std::vector<double>> history;

 private:
  LinearRegressionSource inner_;
};

Verdict accuracy_unchanged() {
  Verdict v;
  constexpr std::size_t kDims = 4, kRows = 8;
  constexpr std::uint32_t kRounds = 100;
  constexpr double kLr = 0.1;
  const CodecConfig codec{40, 64, 65536.0};
  const double tol = std::ldexp(1.0, -(codec.scale_bits + 1));
  double worst_step = 0, worst_grid = 0, worst_float = 0;

  for (std::size_t parties : {2u, 4u, 8u}) {
    SeededRandom rng(derive_seed("acceptance/c2", parties));
    const std::vector<double> truth{0.5, -1.25, 2.0, 0.75};
    std::vector<Batch> shards(parties);
    for (Batch& b : shards) {
      for (std::size_t i = 0; i < kRows; ++i) {
        std::vector<double> x(kDims);
        double y = uniform(rng, -0.05, 0.05);
        for (std::size_t j = 0; j < kDims; ++j) {
          x[j] = uniform(rng, -1, 1);
          y += x[j] * truth[j];
        }
        b.x.push_back(x);
        b.y.push_back(y);
      }
    }
    Batch pooled;
    for (const Batch& b : shards) {
      pooled.x.insert(pooled.x.end(), b.x.begin(), b.x.end());
      pooled.y.insert(pooled.y.end(), b.y.begin(), b.y.end());
    }
    const std::vector<double> theta0(kDims, 0.0);

    // Centralized plaintext GD on the pooled data.
    std::vector<std::vector<double>> central;
    {
      std::vector<double> th = theta0;
      for (std::uint32_t t = 0; t < kRounds; ++t) {
        th = apply_update(th, produce_gradient(th, pooled), kLr);
        central.push_back(th);
      }
    }
    // Centralized GD with each shard gradient rounded to the 2^-s grid.
    std::vector<std::vector<double>> grid;
    {
      std::vector<double> th = theta0;
      const double scale = std::ldexp(1.0, codec.scale_bits);
      for (std::uint32_t t = 0; t < kRounds; ++t) {
        std::vector<long double> sum(kDims, 0);
        for (const Batch& b : shards) {
          auto g = produce_gradient(th, b);
          for (std::size_t j = 0; j < kDims; ++j) sum[j] += std::round(g[j] * scale);
        }
        std::vector<double> avg(kDims);
        for (std::size_t j = 0; j < kDims; ++j) {
          avg[j] = static_cast<double>(sum[j] / (scale * static_cast<long double>(parties)));
        }
        th = apply_update(th, avg, kLr);
        grid.push_back(th);
      }
    }

    for (Protocol protocol : {Protocol::kRing, Protocol::kBroadcast, Protocol::kAllReduce}) {
      Scenario s;
      s.parties = parties;
      s.protocol = protocol;
      s.vector_length = kDims;
      s.rounds = kRounds;
      s.codec = codec;
      s.transform = TransformTiming::kZero;
      s.record_transcript = false;
      s.seed = 1000 + parties;
      std::vector<std::unique_ptr<GradientSource>> sources;
      for (std::size_t i = 0; i < parties; ++i) {
        sources.push_back(std::make_unique<RecordingSource>(theta0, shards[i], kLr));
      }
      SimCluster cluster(s, std::move(sources));
      cluster.run();
      const std::string tag = std::string(to_string(protocol)) + " P=" + std::to_string(parties);
      if (cluster.state().status != JobStatus::kCompleted) {
        v.fail(tag + " did not complete");
        continue;
      }
      for (std::size_t rank = 1; rank <= parties; ++rank) {
        auto& rec = dynamic_cast<RecordingSource&>(cluster.source_at_initial_rank(rank));
        if (rec.history.size() != kRounds) {
          v.fail(tag + " missing rounds");
          continue;
        }
        std::vector<double> prev = theta0;
        for (std::uint32_t t = 0; t < kRounds; ++t) {
          const auto exact = produce_gradient(prev, pooled);
          const auto one_step = apply_update(prev, exact, kLr);
          for (std::size_t j = 0; j < kDims; ++j) {
            const double step_err = std::abs(rec.averages[t][j] - exact[j]);
            const double grid_err = std::abs(rec.history[t][j] - grid[t][j]);
            worst_step = std::max({worst_step, step_err, std::abs(rec.history[t][j] - one_step[j])});
            worst_grid = std::max(worst_grid, grid_err);
            worst_float = std::max(worst_float, std::abs(rec.history[t][j] - central[t][j]));
            if (step_err > tol) v.fail(tag + " gradient off by " + fmt("%.3g", step_err));
            if (grid_err > tol) v.fail(tag + " theta off fixed-point grid by " + fmt("%.3g", grid_err));
          }
          prev = rec.history[t];
        }
      }
    }
  }
  if (worst_float > 1e-9) v.fail("trajectory drifted from float GD by " + fmt("%.3g", worst_float));
  if (v.pass) {
    v.detail = "max per-round gradient err " + fmt("%.3g", worst_step) + ", vs fixed-point GD " +
               fmt("%.3g", worst_grid) + ", vs float GD after 100 rounds " + fmt("%.3g", worst_float) +
               " (bound " + fmt("%.3g", tol) + ")";
  }
  return v;
}

// ---- C3 -----------------------------------------------------------------

std::vector<std::vector<double>> run_fixed(std::size_t parties, Protocol protocol,
                                           const std::vector<std::vector<double>>& inputs,
                                           std::uint64_t seed) {
  Scenario s;
  s.parties = parties;
  s.protocol = protocol;
  s.vector_length = inputs[0].size();
  s.rounds = 1;
  s.transform = TransformTiming::kZero;
  s.record_transcript = false;
  s.seed = seed;
  std::vector<std::unique_ptr<GradientSource>> sources;
  for (const auto& in : inputs) sources.push_back(std::make_unique<FixedSource>(in));
  SimCluster cluster(s, std::move(sources));
  cluster.run();
  std::vector<std::vector<double>> out;
  if (cluster.state().status != JobStatus::kCompleted) return out;
  for (std::size_t r = 1; r <= parties; ++r) {
    out.push_back(dynamic_cast<FixedSource&>(cluster.source_at_initial_rank(r)).received());
  }
  return out;
}

Verdict protocol_equivalence() {
  Verdict v;
  const CodecConfig codec{40, 64, 65536.0};
  const double scale = std::ldexp(1.0, codec.scale_bits);
  SeededRandom rng(derive_seed("acceptance/c3", 1));
  std::size_t cases = 0;

  auto check = [&](std::size_t parties, std::size_t length, std::uint64_t seed) {
    std::vector<std::vector<double>> inputs(parties, std::vector<double>(length));
    for (auto& in : inputs) {
      for (double& x : in) x = uniform(rng, -100, 100);
    }
    // Exact oracle: integer sum of the rounded inputs over 2^s * P.
    std::vector<double> oracle(length);
    for (std::size_t j = 0; j < length; ++j) {
      mpz_class sum = 0;
      for (const auto& in : inputs) sum += mpz_class(std::round(in[j] * scale));
      mpq_class q(sum, mpz_class(1));
      q /= mpq_class(scale) * mpq_class(static_cast<unsigned long>(parties));
      oracle[j] = q.get_d();
    }
    auto ring = run_fixed(parties, Protocol::kRing, inputs, seed);
    auto bcast = run_fixed(parties, Protocol::kBroadcast, inputs, seed);
    auto ar = run_fixed(parties, Protocol::kAllReduce, inputs, seed);
    ++cases;
    const std::string tag = "P=" + std::to_string(parties) + " L=" + std::to_string(length);
    if (ring.empty() || bcast.empty() || ar.empty()) return v.fail(tag + " did not complete");
    for (std::size_t r = 0; r < parties; ++r) {
      if (ring[r] != oracle) return v.fail(tag + " ring differs from oracle");
      if (bcast[r] != ring[r]) return v.fail(tag + " broadcast differs from ring");
      if (ar[r] != ring[r]) return v.fail(tag + " all-reduce differs from ring");
    }
  };

  // Full grid once, then 50 randomized trials drawn from the same grid.
  for (std::size_t p = 2; p <= 8; ++p) {
    for (std::size_t len = 1; len <= 32; ++len) check(p, len, 7 * p + len);
  }
  for (int t = 0; t < 50; ++t) {
    const std::size_t p = 2 + rng.next_u64() % 7;
    const std::size_t len = 1 + rng.next_u64() % 32;
    check(p, len, 10000 + static_cast<std::uint64_t>(t));
  }
  if (v.pass) v.detail = std::to_string(cases) + " cases (224-point grid + 50 random trials), bitwise equal";
  return v;
}

// ---- C4 -----------------------------------------------------------------

Verdict scaling_trends() {
  Verdict v;
  std::map<Protocol, std::vector<std::pair<double, double>>> comm;
  for (std::size_t parties : {8u, 16u, 32u}) {
    for (Protocol protocol : {Protocol::kRing, Protocol::kBroadcast, Protocol::kAllReduce}) {
      Scenario s;
      s.parties = parties;
      s.protocol = protocol;
      s.vector_length = 1024;
      s.rounds = 1;
      s.latency_ms = 1.0;
      s.bandwidth = 1e8;
      s.transform = TransformTiming::kZero;
      s.record_transcript = false;
      ScenarioResult r = run_scenario(s);
      if (r.rows.size() != 1) {
        v.fail(std::string(to_string(protocol)) + " P=" + std::to_string(parties) + " failed");
        return v;
      }
      comm[protocol].emplace_back(static_cast<double>(parties), r.rows[0].comm_time_s);
    }
  }
  std::ostringstream detail;
  for (std::size_t i = 0; i < 3; ++i) {
    const double ar = comm[Protocol::kAllReduce][i].second;
    const double bc = comm[Protocol::kBroadcast][i].second;
    const double ring = comm[Protocol::kRing][i].second;
    const auto p = static_cast<int>(comm[Protocol::kRing][i].first);
    detail << "P=" << p << " ar/bc/ring=" << fmt("%.2f", ar * 1e3) << "/" << fmt("%.2f", bc * 1e3)
           << "/" << fmt("%.2f", ring * 1e3) << "ms; ";
    if (!(ar < bc && bc < ring)) v.fail("ordering broken at P=" + std::to_string(p));
  }
  // Least-squares fit of ring comm time against P.
  const auto& pts = comm[Protocol::kRing];
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  const double r2 = syy == 0 ? 0 : sxy * sxy / (sxx * syy);
  detail << "ring R^2=" << fmt("%.6f", r2);
  if (r2 < 0.99) v.fail("ring comm not linear in P, R^2=" + fmt("%.4f", r2));
  if (v.pass) v.detail = detail.str();
  return v;
}

// ---- C5 -----------------------------------------------------------------

Verdict transform_dominance() {
  Verdict v;
  std::ostringstream detail;
  for (Protocol protocol : {Protocol::kRing, Protocol::kBroadcast, Protocol::kAllReduce}) {
    Scenario s;
    s.parties = 2;
    s.protocol = protocol;
    s.vector_length = 4096;
    s.key_bits = 2048;
    s.rounds = 1;
    s.latency_ms = 0.1;
    s.bandwidth = 1e9;
    s.transform = TransformTiming::kMeasured;
    s.record_transcript = false;
    ScenarioResult r = run_scenario(s);
    if (r.rows.size() != 1) {
      v.fail(std::string(to_string(protocol)) + " failed");
      return v;
    }
    const ReportRow& row = r.rows[0];
    detail << to_string(protocol) << " transform=" << fmt("%.2f", row.transform_time_s)
           << "s comm=" << fmt("%.4f", row.comm_time_s) << "s; ";
    if (!(row.transform_time_s > row.comm_time_s)) {
      v.fail(std::string(to_string(protocol)) + " comm exceeds transform");
    }
  }
  if (v.pass) v.detail = detail.str();
  return v;
}

// ---- C6 -----------------------------------------------------------------

std::string fingerprint(const ScenarioResult& r) {
  std::ostringstream out;
  write_report(out, r.rows);
  for (const JobEvent& e : r.events) {
    out << fmt("%.9f", e.time) << ' ' << to_string(e.kind) << ' ' << e.detail << '\n';
  }
  return out.str();
}

bool has_event(const ScenarioResult& r, JobEventKind kind) {
  for (const JobEvent& e : r.events) {
    if (e.kind == kind) return true;
  }
  return false;
}

Verdict fault_tolerance() {
  Verdict v;
  Scenario s;
  s.parties = 4;
  s.protocol = Protocol::kRing;
  s.vector_length = 8;
  s.rounds = 2;
  s.latency_ms = 1;
  s.bandwidth = 1e8;
  s.transform = TransformTiming::kZero;
  s.failure_plan.push_back(FailureSpec{1, 2, 0, std::nullopt});
  ScenarioResult a = run_scenario(s);
  if (a.final_status != JobStatus::kCompleted) v.fail("P=4 job did not complete");
  if (!has_event(a, JobEventKind::kPaused)) v.fail("no pause after failure");
  if (!has_event(a, JobEventKind::kEliminated) || !has_event(a, JobEventKind::kRebuilt)) {
    v.fail("ring was not rebuilt");
  }
  if (a.rows.empty() || a.rows[0].parties != 3) v.fail("round did not succeed with P=3");
  if (fingerprint(a) != fingerprint(run_scenario(s))) v.fail("replay differs under same seed");

  Scenario two = s;
  two.parties = 2;
  two.failure_plan = {FailureSpec{1, 2, 0, std::nullopt}};
  ScenarioResult b = run_scenario(two);
  if (b.final_status != JobStatus::kAborted) v.fail("P=2 job did not abort");
  if (fingerprint(b) != fingerprint(run_scenario(two))) v.fail("P=2 replay differs");
  if (v.pass) v.detail = "P=4 paused, rebuilt to P=3 and completed; P=2 aborted; replays identical";
  return v;
}

// ---- C7 -----------------------------------------------------------------

Verdict collusion_checks() {
  Verdict v;
  const std::vector<std::pair<std::size_t, std::vector<std::size_t>>> plants{
      {4, {2, 3}}, {5, {1, 4}}, {6, {2, 5, 6}}};
  for (const auto& [parties, ranks] : plants) {
    Scenario s;
    s.parties = parties;
    s.protocol = Protocol::kBroadcast;
    s.vector_length = 6;
    s.transform = TransformTiming::kZero;
    s.collusion_plan = CollusionPlan{ranks, CollusionMode::kDuplicateCiphertext};
    ScenarioResult r = run_scenario(s);
    if (!r.red_flag || r.red_flag->ranks() != ranks) {
      v.fail("red flag missing or wrong for P=" + std::to_string(parties));
    }
  }
  std::ostringstream detail;
  for (std::size_t p = 3; p <= 5; ++p) {
    std::size_t minimal = p;
    for (unsigned mask = 1; mask + 1 < (1u << p); ++mask) {
      std::vector<std::size_t> colluders;
      for (std::size_t r = 1; r <= p; ++r) {
        if (mask & (1u << (r - 1))) colluders.push_back(r);
      }
      ExposureAnalysis a = analyze_pass_through(p, colluders, Protocol::kRing, 1);
      if (!a.completed || a.contributors.size() != p - colluders.size() ||
          a.isolated != (colluders.size() == p - 1)) {
        v.fail("unexpected exposure at P=" + std::to_string(p));
      }
      if (a.isolated) minimal = std::min(minimal, colluders.size());
    }
    detail << "P=" << p << " min isolating coalition " << minimal << "; ";
    if (minimal != p - 1) v.fail("isolation below P-1 at P=" + std::to_string(p));
  }
  if (v.pass) v.detail = "red flags exact for 3 plants; " + detail.str();
  return v;
}

// ---- C8 -----------------------------------------------------------------

Verdict privacy_scan() {
  Verdict v;
  const CodecConfig codec{40, 64, 65536.0};
  std::size_t frames = 0, ciphertext_frames = 0;
  for (Protocol protocol : {Protocol::kRing, Protocol::kBroadcast, Protocol::kAllReduce}) {
    constexpr std::size_t kParties = 4, kLen = 5;
    Scenario s;
    s.parties = kParties;
    s.protocol = protocol;
    s.vector_length = kLen;
    s.rounds = 2;
    s.transform = TransformTiming::kZero;
    s.codec = codec;
    std::vector<Needle> needles;
    std::vector<std::unique_ptr<GradientSource>> sources;
    for (std::size_t i = 0; i < kParties; ++i) {
      std::vector<double> g(kLen);
      for (std::size_t j = 0; j < kLen; ++j) {
        g[j] = 0.7071067811865476 * static_cast<double>(i + 1) + 0.0123456789 * static_cast<double>(j);
        ByteWriter w;
        w.f64(g[j]);
        needles.push_back({"f64", w.take()});
        mpz_class fixed(std::round(g[j] * std::ldexp(1.0, codec.scale_bits)));
        const std::size_t width = (mpz_sizeinbase(fixed.get_mpz_t(), 2) + 7) / 8;
        needles.push_back({"fixed", to_fixed_bytes(fixed, width)});
      }
      sources.push_back(std::make_unique<FixedSource>(g));
    }
    SimCluster cluster(s, std::move(sources));
    cluster.run();
    const std::string tag = to_string(protocol);
    if (cluster.state().status != JobStatus::kCompleted) {
      v.fail(tag + " did not complete");
      continue;
    }
    const auto& transcript = cluster.network().transcript();
    frames += transcript.size();
    for (const auto& e : transcript) {
      const auto type = static_cast<MessageType>(e.frame[4]);
      if (type == MessageType::kAggMsg || type == MessageType::kAggSubmit) ++ciphertext_frames;
    }
    auto findings = scan_transcript(transcript, needles);
    if (!findings.empty()) v.fail(tag + ": sentinel found in frame " + std::to_string(findings[0].frame_index));

    // Positive control: the same needle in a plaintext frame is caught.
    ByteWriter w;
    w.raw(needles[0].bytes);
    Frame leak{MessageType::kHeartbeat, cluster.job_id(), {}, w.take()};
    if (scan_transcript({TranscriptEntry{0, 0, "x", "y", encode_frame(leak)}}, needles).empty()) {
      v.fail("scanner missed a planted plaintext sentinel");
    }

    const auto audit = cluster.coordinator().decrypt_audit(cluster.job_id());
    if (audit.size() != s.rounds) v.fail(tag + ": unexpected number of decryptions");
    for (const DecryptRecord& d : audit) {
      std::set<std::size_t> full;
      if (protocol == Protocol::kRing) {
        full = {kParties};
      } else {
        for (std::size_t r = 1; r <= kParties; ++r) full.insert(r);
      }
      if (d.submitters != full || d.elements != kLen || d.parties != kParties) {
        v.fail(tag + ": decryption of a partial aggregate");
      }
    }
  }
  if (ciphertext_frames == 0) v.fail("no ciphertext frames were scanned");
  if (v.pass) {
    v.detail = std::to_string(frames) + " frames scanned, " + std::to_string(ciphertext_frames) +
               " carry ciphertexts; every decryption was a full aggregate";
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"C1", crypto_correctness},   {"C2", accuracy_unchanged}, {"C3", protocol_equivalence},
      {"C4", scaling_trends},       {"C5", transform_dominance}, {"C6", fault_tolerance},
      {"C7", collusion_checks},     {"C8", privacy_scan},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = run();
    } catch (const std::exception& e) {
      verdict.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << name << ' ' << (verdict.pass ? "PASS" : "FAIL") << " (" << fmt("%.1f", secs)
              << "s) " << verdict.detail << std::endl;
    if (!verdict.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
