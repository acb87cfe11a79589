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

#ifndef SECAGG_TOPOLOGY_HPP_
#define SECAGG_TOPOLOGY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/codec.hpp"

namespace secagg {

// One administrative domain taking part in a job.
struct Participant {
  std::string name;
  std::optional<std::string> location_tag;
  std::string endpoint;

  friend bool operator==(const Participant&, const Participant&) = default;
};

enum class RingStrategy : std::uint8_t {
  kNameAscending = 0,
  kNameDescending = 1,
  kConsistentHash = 2,
  kLocationGrouped = 3,
};

const char* to_string(RingStrategy s);
RingStrategy parse_ring_strategy(std::string_view s);

// First 8 bytes of SHA-256(name), big-endian.
std::uint64_t hash_position(std::string_view name);

// Participants ordered around a ring; ranks run 1..P in ring order and rank
// r sends to rank (r mod P) + 1. Immutable once built.
class RingTopology {
 public:
  RingTopology(std::vector<Participant> ordered, RingStrategy strategy);

  std::size_t size() const { return ordered_.size(); }
  RingStrategy strategy() const { return strategy_; }
  const std::vector<Participant>& participants() const { return ordered_; }

  // 1-based.
  const Participant& at_rank(std::size_t rank) const;
  std::optional<std::size_t> rank_of(std::string_view name) const;
  std::size_t successor(std::size_t rank) const;
  std::size_t predecessor(std::size_t rank) const;

  friend bool operator==(const RingTopology& a, const RingTopology& b) {
    return a.strategy_ == b.strategy_ && a.ordered_ == b.ordered_;
  }

 private:
  std::vector<Participant> ordered_;
  std::map<std::string, std::size_t, std::less<>> ranks_;
  RingStrategy strategy_;
};

// Deterministic in (participant set, strategy). Rejects duplicates and P < 2.
RingTopology build_ring(std::span<const Participant> participants,
                        RingStrategy strategy);

// One chunk transfer of ring all-reduce. Ranks and chunk indices are 1-based.
struct Transfer {
  std::size_t step = 0;
  std::size_t sender_rank = 0;
  std::size_t receiver_rank = 0;
  std::size_t chunk_index = 0;
  ChunkBounds bounds;

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

class AllReduceSchedule {
 public:
  AllReduceSchedule(std::size_t parties, std::size_t vector_length);

  std::size_t parties() const { return parties_; }
  std::size_t steps() const { return parties_ - 1; }
  std::size_t vector_length() const { return vector_length_; }
  // Indexed by chunk_index - 1.
  const std::vector<ChunkBounds>& chunks() const { return chunks_; }
  const ChunkBounds& bounds(std::size_t chunk_index) const;
  // Every (step, sender) pair, ordered by step then sender rank.
  const std::vector<Transfer>& transfers() const { return transfers_; }

  // Chunk rank sends at step s: ((rank - s) mod P) + 1.
  std::size_t send_chunk(std::size_t rank, std::size_t step) const;
  // Chunk rank receives at step s: ((rank - s - 1) mod P) + 1.
  std::size_t receive_chunk(std::size_t rank, std::size_t step) const;
  // Fully aggregated chunk held after the last step: (rank mod P) + 1.
  std::size_t final_chunk(std::size_t rank) const;

 private:
  std::size_t wrap(std::ptrdiff_t v) const;

  std::size_t parties_;
  std::size_t vector_length_;
  std::vector<ChunkBounds> chunks_;
  std::vector<Transfer> transfers_;
};

AllReduceSchedule allreduce_schedule(const RingTopology& ring,
                                     std::size_t vector_length);

}  // namespace secagg

#endif  // SECAGG_TOPOLOGY_HPP_
