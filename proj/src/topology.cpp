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

#include "secagg/topology.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "secagg/bytes.hpp"
#include "secagg/error.hpp"

namespace secagg {

const char* to_string(RingStrategy s) {
  switch (s) {
    case RingStrategy::kNameAscending: return "name_ascending";
    case RingStrategy::kNameDescending: return "name_descending";
    case RingStrategy::kConsistentHash: return "consistent_hash";
    case RingStrategy::kLocationGrouped: return "location_grouped";
  }
  return "unknown";
}

RingStrategy parse_ring_strategy(std::string_view s) {
  for (RingStrategy r :
       {RingStrategy::kNameAscending, RingStrategy::kNameDescending,
        RingStrategy::kConsistentHash, RingStrategy::kLocationGrouped}) {
    if (s == to_string(r)) return r;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown ring strategy '" + std::string(s) + "'");
}

std::uint64_t hash_position(std::string_view name) {
  auto digest = sha256(ByteView(reinterpret_cast<const std::uint8_t*>(name.data()),
                                name.size()));
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | digest[i];
  return v;
}

RingTopology::RingTopology(std::vector<Participant> ordered,
                           RingStrategy strategy)
    : ordered_(std::move(ordered)), strategy_(strategy) {
  for (std::size_t i = 0; i < ordered_.size(); ++i) {
    if (ordered_[i].name.empty()) {
      throw Error(ErrorCode::kTopology, "participant name must be non-empty");
    }
    if (!ranks_.emplace(ordered_[i].name, i + 1).second) {
      throw Error(ErrorCode::kTopology,
                  "duplicate participant '" + ordered_[i].name + "'");
    }
  }
  if (ordered_.size() < 2) {
    throw Error(ErrorCode::kTopology, "a ring needs at least two participants");
  }
}

const Participant& RingTopology::at_rank(std::size_t rank) const {
  if (rank < 1 || rank > ordered_.size()) {
    throw Error(ErrorCode::kOutOfRange, "rank " + std::to_string(rank) + " not in ring");
  }
  return ordered_[rank - 1];
}

std::optional<std::size_t> RingTopology::rank_of(std::string_view name) const {
  auto it = ranks_.find(name);
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::size_t RingTopology::successor(std::size_t rank) const {
  at_rank(rank);
  return rank % ordered_.size() + 1;
}

std::size_t RingTopology::predecessor(std::size_t rank) const {
  at_rank(rank);
  return rank == 1 ? ordered_.size() : rank - 1;
}

RingTopology build_ring(std::span<const Participant> participants,
                        RingStrategy strategy) {
  std::vector<Participant> ordered(participants.begin(), participants.end());
  std::set<std::string_view> seen;
  for (const Participant& p : ordered) {
    if (!seen.insert(p.name).second) {
      throw Error(ErrorCode::kTopology, "duplicate participant '" + p.name + "'");
    }
  }
  if (ordered.size() < 2) {
    throw Error(ErrorCode::kTopology, "a ring needs at least two participants");
  }
  auto by_name = [](const Participant& a, const Participant& b) {
    return a.name < b.name;
  };
  switch (strategy) {
    case RingStrategy::kNameAscending:
      std::sort(ordered.begin(), ordered.end(), by_name);
      break;
    case RingStrategy::kNameDescending:
      std::sort(ordered.begin(), ordered.end(),
                [](const Participant& a, const Participant& b) {
                  return a.name > b.name;
                });
      break;
    case RingStrategy::kConsistentHash:
      std::sort(ordered.begin(), ordered.end(),
                [](const Participant& a, const Participant& b) {
                  return std::make_tuple(hash_position(a.name), std::cref(a.name)) <
                         std::make_tuple(hash_position(b.name), std::cref(b.name));
                });
      break;
    case RingStrategy::kLocationGrouped:
      // Untagged participants group together ahead of every tag.
      std::sort(ordered.begin(), ordered.end(),
                [](const Participant& a, const Participant& b) {
                  return std::tie(a.location_tag, a.name) <
                         std::tie(b.location_tag, b.name);
                });
      break;
  }
  return RingTopology(std::move(ordered), strategy);
}

AllReduceSchedule::AllReduceSchedule(std::size_t parties,
                                     std::size_t vector_length)
    : parties_(parties), vector_length_(vector_length) {
  if (parties < 2) {
    throw Error(ErrorCode::kTopology, "all-reduce needs at least two parties");
  }
  chunks_ = chunk_bounds(vector_length, parties);
  for (std::size_t step = 1; step <= steps(); ++step) {
    for (std::size_t rank = 1; rank <= parties_; ++rank) {
      std::size_t idx = send_chunk(rank, step);
      transfers_.push_back(Transfer{step, rank, rank % parties_ + 1, idx,
                                    chunks_[idx - 1]});
    }
  }
}

std::size_t AllReduceSchedule::wrap(std::ptrdiff_t v) const {
  auto p = static_cast<std::ptrdiff_t>(parties_);
  return static_cast<std::size_t>(((v % p) + p) % p) + 1;
}

const ChunkBounds& AllReduceSchedule::bounds(std::size_t chunk_index) const {
  if (chunk_index < 1 || chunk_index > parties_) {
    throw Error(ErrorCode::kOutOfRange, "chunk index out of range");
  }
  return chunks_[chunk_index - 1];
}

std::size_t AllReduceSchedule::send_chunk(std::size_t rank,
                                          std::size_t step) const {
  return wrap(static_cast<std::ptrdiff_t>(rank) - static_cast<std::ptrdiff_t>(step));
}

std::size_t AllReduceSchedule::receive_chunk(std::size_t rank,
                                             std::size_t step) const {
  return wrap(static_cast<std::ptrdiff_t>(rank) - static_cast<std::ptrdiff_t>(step) - 1);
}

std::size_t AllReduceSchedule::final_chunk(std::size_t rank) const {
  return rank % parties_ + 1;
}

AllReduceSchedule allreduce_schedule(const RingTopology& ring,
                                     std::size_t vector_length) {
  return AllReduceSchedule(ring.size(), vector_length);
}

}  // namespace secagg
