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

// secagg-sim: run scenarios, benchmark protocols and replay attacks on the
// simulated network (or loopback TCP with --real-net).

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "secagg/net.hpp"
#include "secagg/sim.hpp"

namespace {

using secagg::Protocol;
using secagg::Scenario;
using secagg::ScenarioResult;

constexpr int kExitOk = 0;
constexpr int kExitProtocol = 2;
constexpr int kExitAssertion = 3;

ScenarioResult execute(const Scenario& s, bool real_net) {
  return real_net ? secagg::run_scenario_tcp(s) : secagg::run_scenario(s);
}

void print_result(const ScenarioResult& r) {
  std::cerr << "status: " << secagg::to_string(r.final_status) << "\n";
  for (const auto& n : r.notes) std::cerr << "note: " << n << "\n";
  for (const auto& a : r.failed_assertions) std::cerr << "ASSERTION FAILED: " << a << "\n";
}

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

int attack_duplicate(std::size_t parties, std::vector<std::size_t> ranks, std::uint64_t seed) {
  Scenario s;
  s.parties = parties;
  s.protocol = Protocol::kBroadcast;
  s.vector_length = 8;
  s.rounds = 1;
  s.seed = seed;
  s.transform = secagg::TransformTiming::kZero;
  s.collusion_plan = secagg::CollusionPlan{ranks, secagg::CollusionMode::kDuplicateCiphertext};
  ScenarioResult r = secagg::run_scenario(s);
  print_result(r);
  std::cout << "duplicate_ciphertext P=" << parties << " planted=" << join(ranks) << " flagged="
            << (r.red_flag ? join(r.red_flag->ranks()) : std::string("none")) << " "
            << (r.exit_code == kExitOk ? "PASS" : "FAIL") << "\n";
  return r.exit_code == kExitOk ? kExitOk : kExitAssertion;
}

int attack_passthrough(const std::vector<std::size_t>& party_counts, Protocol protocol,
                       std::uint64_t seed) {
  bool ok = true;
  for (std::size_t p : party_counts) {
    std::size_t minimal = p;  // smallest colluder set that isolates someone
    for (unsigned mask = 1; mask + 1 < (1u << p); ++mask) {
      std::vector<std::size_t> colluders;
      for (std::size_t r = 1; r <= p; ++r) {
        if (mask & (1u << (r - 1))) colluders.push_back(r);
      }
      secagg::ExposureAnalysis a = secagg::analyze_pass_through(p, colluders, protocol, seed);
      const bool expected = colluders.size() == p - 1;
      if (!a.completed || a.isolated != expected ||
          a.contributors.size() != p - colluders.size()) {
        ok = false;
        std::cout << "P=" << p << " colluders=" << join(colluders) << " unexpected exposure\n";
      }
      if (a.isolated) minimal = std::min(minimal, colluders.size());
    }
    std::cout << "pass_through " << secagg::to_string(protocol) << " P=" << p
              << " smallest isolating coalition=" << minimal << " (P-1=" << p - 1 << ")\n";
    if (minimal != p - 1) ok = false;
  }
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure gradient aggregation simulator"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  bool real_net = false;
  app.add_option("--seed", seed, "Scenario seed (overrides the file)");
  app.add_flag("--real-net", real_net, "Use loopback TCP instead of the simulated network");

  auto* run = app.add_subcommand("run", "Run one scenario file");
  std::string scenario_path, run_out = "report.csv";
  run->add_option("--scenario", scenario_path, "Scenario file (key = value or JSON)")
      ->required();
  run->add_option("--out", run_out, "CSV report path");

  auto* bench = app.add_subcommand("bench", "Sweep parties and protocols");
  std::vector<std::size_t> parties{2, 4, 8};
  std::vector<std::string> protocols{"ring", "broadcast", "allreduce"};
  std::size_t length = 1024;
  std::uint32_t rounds = 1;
  unsigned key_bits = 512;
  double latency_ms = 1.0, bandwidth = 1e8;
  std::string transform = "measured", bench_out = "report.csv";
  bench->add_option("--parties", parties, "Party counts")->delimiter(',');
  bench->add_option("--protocols", protocols, "Protocols")->delimiter(',');
  bench->add_option("--length", length, "Gradient vector length");
  bench->add_option("--rounds", rounds, "Rounds per configuration");
  bench->add_option("--key-bits", key_bits, "Paillier modulus size");
  bench->add_option("--latency-ms", latency_ms, "One-way link latency");
  bench->add_option("--bandwidth", bandwidth, "Bytes per second per sender, 0 = unlimited");
  bench->add_option("--transform", transform, "measured or zero");
  bench->add_option("--out", bench_out, "CSV report path");

  auto* attack = app.add_subcommand("attack", "Collusion scenarios");
  std::string mode;
  std::vector<std::size_t> attack_parties;
  std::vector<std::size_t> ranks{2, 3};
  std::string attack_protocol = "ring";
  attack->add_option("--mode", mode, "duplicate or passthrough")
      ->required()
      ->check(CLI::IsMember({"duplicate", "passthrough"}));
  attack->add_option("--parties", attack_parties, "Party counts")->delimiter(',');
  attack->add_option("--ranks", ranks, "Colluding ranks (duplicate mode)")->delimiter(',');
  attack->add_option("--protocol", attack_protocol, "Protocol for pass-through analysis");

  CLI11_PARSE(app, argc, argv);
  const bool seed_given = app.count("--seed") > 0;

  try {
    if (*run) {
      Scenario s = Scenario::load(scenario_path);
      if (seed_given) s.seed = seed;
      ScenarioResult r = execute(s, real_net);
      print_result(r);
      if (!r.rows.empty()) secagg::emit_report(run_out, r.rows);
      return r.exit_code;
    }
    if (*bench) {
      std::vector<secagg::ReportRow> rows;
      int code = kExitOk;
      for (std::size_t p : parties) {
        for (const std::string& name : protocols) {
          Scenario s;
          s.parties = p;
          s.protocol = secagg::parse_protocol(name);
          s.vector_length = length;
          s.rounds = rounds;
          s.key_bits = key_bits;
          s.latency_ms = latency_ms;
          s.bandwidth = bandwidth;
          s.seed = seed;
          s.transform = transform == "zero" ? secagg::TransformTiming::kZero
                                            : secagg::TransformTiming::kMeasured;
          s.record_transcript = false;
          ScenarioResult r = execute(s, real_net);
          if (r.exit_code != kExitOk) {
            print_result(r);
            code = r.exit_code;
          }
          rows.insert(rows.end(), r.rows.begin(), r.rows.end());
          std::cerr << "P=" << p << " " << name << ": " << r.rows.size() << " rounds\n";
        }
      }
      if (!rows.empty()) secagg::emit_report(bench_out, rows);
      return code;
    }
    if (*attack) {
      if (mode == "duplicate") {
        std::size_t p = attack_parties.empty() ? 4 : attack_parties.front();
        return attack_duplicate(p, ranks, seed);
      }
      if (attack_parties.empty()) attack_parties = {3, 4, 5};
      return attack_passthrough(attack_parties, secagg::parse_protocol(attack_protocol), seed);
    }
  } catch (const secagg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == secagg::ErrorCode::kInvalidArgument ? 1 : kExitProtocol;
  }
  return kExitOk;
}
