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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "secagg/codec.hpp"
#include "secagg/topology.hpp"

using namespace secagg;

namespace {

// A 600-bit odd modulus is enough for the codec, which never factors it.
mpz_class big_modulus() {
  mpz_class n = 1;
  n <<= 599;
  return n + 12345;
}

}  // namespace

TEST_SUITE("codec") {
  TEST_CASE("spot values") {
    CodecConfig cfg{16, 64, 65536.0};
    mpz_class n = big_modulus();
    std::vector<double> v{0.0, 1.5, -1.0};
    EncodedVector e = encode(cfg, n, v);
    CHECK(e.elements[0] == 0);
    CHECK(e.elements[1] == 98304);
    CHECK(e.elements[2] == n - 65536);
  }

  TEST_CASE("rounds half away from zero") {
    CodecConfig cfg{1, 64, 65536.0};
    mpz_class n = big_modulus();
    std::vector<double> v{0.25, -0.25, 0.75};
    EncodedVector e = encode(cfg, n, v);
    CHECK(e.elements[0] == 1);
    CHECK(e.elements[1] == n - 1);
    CHECK(e.elements[2] == 2);
  }

  TEST_CASE("decode of sums") {
    CodecConfig cfg{40, 64, 65536.0};
    mpz_class n = big_modulus();
    auto sum_of = [&](std::vector<double> xs) {
      mpz_class s = 0;
      for (double x : xs) s += encode(cfg, n, std::vector<double>{x}).elements[0];
      s %= n;
      return decode_sum(cfg, n, std::vector<mpz_class>{s}, static_cast<unsigned>(xs.size()))[0];
    };
    CHECK(sum_of({1.0, 2.0, 3.0}) == 2.0);
    CHECK(sum_of({0.5, -0.5}) == 0.0);
    CHECK(sum_of({-3.0, -5.0}) == -4.0);
    const double x = 0.123456789;
    CHECK(std::abs(sum_of({x}) - x) <= std::ldexp(1.0, -40));
  }

  TEST_CASE("centering") {
    mpz_class n = 101;
    CHECK(center(0, n) == 0);
    CHECK(center(50, n) == 50);
    CHECK(center(51, n) == -50);
    CHECK(center(100, n) == -1);
  }

  TEST_CASE("rejects bad inputs") {
    CodecConfig cfg{40, 64, 65536.0};
    mpz_class n = big_modulus();
    CHECK_THROWS_AS(encode(cfg, n, std::vector<double>{NAN}), Error);
    CHECK_THROWS_AS(encode(cfg, n, std::vector<double>{INFINITY}), Error);
    CHECK_THROWS_AS(encode(cfg, n, std::vector<double>{65536.5}), Error);
    CHECK_NOTHROW(encode(cfg, n, std::vector<double>{-65536.0}));
    CHECK_THROWS_AS(decode_sum(cfg, n, std::vector<mpz_class>{0}, 65), Error);
    CHECK_THROWS_AS(decode_sum(cfg, n, std::vector<mpz_class>{0}, 0), Error);
  }

  TEST_CASE("headroom condition") {
    // 2 * (6 + 40 + 16 + 1) = 126
    CodecConfig cfg{40, 64, 65536.0};
    CHECK(cfg.headroom_bits() == 126);
    CHECK_NOTHROW(cfg.validate(512));
    CodecConfig tight{240, 64, 65536.0};
    CHECK(tight.headroom_bits() == 2 * (6 + 240 + 16 + 1));
    CHECK_THROWS_AS(tight.validate(512), Error);
    CHECK_NOTHROW(tight.validate(1024));
  }

  TEST_CASE("chunk sizes") {
    auto sizes = [](std::size_t len, std::size_t parts) {
      std::vector<std::size_t> out;
      for (auto b : chunk_bounds(len, parts)) out.push_back(b.size);
      return out;
    };
    CHECK(sizes(10, 1) == std::vector<std::size_t>{10});
    CHECK(sizes(10, 3) == std::vector<std::size_t>{4, 3, 3});
    CHECK(sizes(2, 3) == std::vector<std::size_t>{1, 1, 0});
    CHECK_THROWS_AS(chunk_bounds(10, 0), Error);
    auto b = chunk_bounds(10, 3);
    CHECK(b[1].offset == 4);
    CHECK(b[2].offset == 7);

    std::vector<int> items{1, 2, 3, 4, 5, 6, 7};
    auto parts = chunk(std::span<const int>(items), 3);
    std::vector<std::vector<int>> copies;
    for (auto p : parts) copies.emplace_back(p.begin(), p.end());
    CHECK(concatenate(copies) == items);
  }
}

TEST_SUITE("topology") {
  std::vector<Participant> named(std::initializer_list<const char*> names) {
    std::vector<Participant> out;
    for (const char* n : names) out.push_back(Participant{n, std::nullopt, std::string(n) + ":1"});
    return out;
  }

  TEST_CASE("name ascending") {
    auto ring = build_ring(named({"b", "a", "c"}), RingStrategy::kNameAscending);
    CHECK(ring.at_rank(1).name == "a");
    CHECK(ring.at_rank(2).name == "b");
    CHECK(ring.at_rank(3).name == "c");
    CHECK(ring.rank_of("c") == 3u);
    CHECK(ring.successor(3) == 1);
    CHECK(ring.predecessor(1) == 3);
    auto desc = build_ring(named({"b", "a", "c"}), RingStrategy::kNameDescending);
    CHECK(desc.at_rank(1).name == "c");
  }

  TEST_CASE("rejects tiny or duplicate rings") {
    CHECK_THROWS_AS(build_ring(named({"a"}), RingStrategy::kNameAscending), Error);
    CHECK_THROWS_AS(build_ring(named({"a", "a"}), RingStrategy::kNameAscending), Error);
  }

  TEST_CASE("hash positions") {
    CHECK(hash_position("") == 0xE3B0C44298FC1C14ULL);
    CHECK(hash_position("n1") == hash_position("n1"));
    // Prefixes of SHA-256("n1"), ("n2"), ("n3") computed offline.
    CHECK(hash_position("n1") == 0x676b8bb84ce7267dULL);
    CHECK(hash_position("n2") == 0x0480a93d2e9b094bULL);
    CHECK(hash_position("n3") == 0x8721d664ef60096aULL);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(hash_position("learner-" + std::to_string(i)));
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("consistent hash order") {
    auto ring = build_ring(named({"n1", "n2", "n3"}), RingStrategy::kConsistentHash);
    CHECK(ring.at_rank(1).name == "n2");
    CHECK(ring.at_rank(2).name == "n1");
    CHECK(ring.at_rank(3).name == "n3");
  }

  TEST_CASE("location grouping keeps zones contiguous") {
    std::vector<Participant> ps{{"d", "east", "d"}, {"a", "west", "a"}, {"c", "east", "c"},
                                {"b", std::nullopt, "b"}};
    auto ring = build_ring(ps, RingStrategy::kLocationGrouped);
    CHECK(ring.at_rank(1).name == "b");
    CHECK(ring.at_rank(2).name == "c");
    CHECK(ring.at_rank(3).name == "d");
    CHECK(ring.at_rank(4).name == "a");
  }

  TEST_CASE("rebuilding is deterministic for every strategy") {
    auto ps = named({"x", "q", "m", "a", "k"});
    auto shuffled = ps;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto s : {RingStrategy::kNameAscending, RingStrategy::kNameDescending,
                   RingStrategy::kConsistentHash, RingStrategy::kLocationGrouped}) {
      CHECK(build_ring(ps, s) == build_ring(shuffled, s));
      CHECK(parse_ring_strategy(to_string(s)) == s);
    }
  }

  TEST_CASE("P=2 schedule") {
    AllReduceSchedule s(2, 5);
    CHECK(s.steps() == 1);
    CHECK(s.send_chunk(1, 1) == 1);
    CHECK(s.send_chunk(2, 1) == 2);
    CHECK(s.final_chunk(1) == 2);
    CHECK(s.final_chunk(2) == 1);
  }

  TEST_CASE("P=3 schedule follows the three-learner walk-through") {
    AllReduceSchedule s(3, 3);
    CHECK(s.steps() == 2);
    // Step 1: learner r sends its own chunk r.
    CHECK(s.send_chunk(1, 1) == 1);
    CHECK(s.send_chunk(2, 1) == 2);
    CHECK(s.send_chunk(3, 1) == 3);
    // Step 2: learner 2 forwards the partially aggregated chunk 1 to learner 3.
    CHECK(s.send_chunk(2, 2) == 1);
    CHECK(s.receive_chunk(3, 2) == 1);
    CHECK(s.final_chunk(3) == 1);
  }

  TEST_CASE("symbolic coverage of the all-reduce schedule") {
    for (std::size_t p = 2; p <= 8; ++p) {
      for (std::size_t len : {p, p + 3, std::size_t{10}}) {
        AllReduceSchedule s(p, len);
        // contributors[rank][chunk] = set of ranks summed into that partial.
        std::vector<std::vector<std::set<std::size_t>>> held(
            p + 1, std::vector<std::set<std::size_t>>(p + 1));
        for (std::size_t r = 1; r <= p; ++r) {
          for (std::size_t c = 1; c <= p; ++c) held[r][c] = {r};
        }
        for (std::size_t step = 1; step <= s.steps(); ++step) {
          std::set<std::size_t> chunks_this_step;
          std::vector<std::pair<std::size_t, std::set<std::size_t>>> inbox(p + 1);
          for (std::size_t r = 1; r <= p; ++r) {
            std::size_t c = s.send_chunk(r, step);
            chunks_this_step.insert(c);
            std::size_t to = r % p + 1;
            REQUIRE(s.receive_chunk(to, step) == c);
            inbox[to] = {c, held[r][c]};
          }
          REQUIRE(chunks_this_step.size() == p);
          for (std::size_t r = 1; r <= p; ++r) {
            auto& [c, from] = inbox[r];
            held[r][c].insert(from.begin(), from.end());
          }
        }
        for (std::size_t r = 1; r <= p; ++r) {
          REQUIRE(held[r][s.final_chunk(r)].size() == p);
        }
        std::set<std::size_t> finals;
        for (std::size_t r = 1; r <= p; ++r) finals.insert(s.final_chunk(r));
        REQUIRE(finals.size() == p);
        CHECK(s.transfers().size() == p * (p - 1));
      }
    }
  }

  TEST_CASE("schedule rejects P < 2") {
    CHECK_THROWS_AS(AllReduceSchedule(1, 4), Error);
  }
}
