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

// Signed fixed-point encoding of gradient vectors into Paillier plaintexts.
// A real x becomes round(x * 2^scale_bits) mod n; negative values wrap into
// the upper half of [0, n). Sums of up to max_parties encodings decode back
// without overflow as long as the headroom condition holds for the key.

#ifndef SECAGG_CODEC_HPP_
#define SECAGG_CODEC_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "secagg/error.hpp"
#include "secagg/paillier.hpp"

namespace secagg {

struct CodecConfig {
  unsigned scale_bits = 40;
  unsigned max_parties = 64;
  double magnitude_bound = 65536.0;

  // Bits needed by a P_max-party sum, doubled: must stay below key_bits.
  unsigned headroom_bits() const;
  // Throws kInvalidArgument if the headroom condition fails for key_bits.
  void validate(unsigned key_bits) const;

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

struct EncodedVector {
  std::vector<mpz_class> elements;
  CodecConfig codec;

  std::size_t size() const { return elements.size(); }
};

// Throws on non-finite input or |x| > magnitude_bound.
EncodedVector encode(const CodecConfig& cfg, const PublicKey& pk,
                     std::span<const double> values);
EncodedVector encode(const CodecConfig& cfg, const mpz_class& modulus,
                     std::span<const double> values);

// Centers each residue, then divides by 2^scale_bits and by parties.
std::vector<double> decode_sum(const CodecConfig& cfg, const mpz_class& modulus,
                               std::span<const mpz_class> residues,
                               unsigned parties);
std::vector<double> decode_sum(const CodecConfig& cfg, const PublicKey& pk,
                               const EncodedVector& e, unsigned parties);

// Residue in [0, n) to signed integer in (-n/2, n/2].
mpz_class center(const mpz_class& residue, const mpz_class& modulus);

struct ChunkBounds {
  std::size_t offset = 0;
  std::size_t size = 0;

  friend bool operator==(const ChunkBounds&, const ChunkBounds&) = default;
};

// parts contiguous chunks; the first (length % parts) hold one extra element.
std::vector<ChunkBounds> chunk_bounds(std::size_t length, std::size_t parts);

template <typename T>
std::vector<std::span<const T>> chunk(std::span<const T> items,
                                      std::size_t parts) {
  std::vector<std::span<const T>> out;
  for (const ChunkBounds& b : chunk_bounds(items.size(), parts)) {
    out.push_back(items.subspan(b.offset, b.size));
  }
  return out;
}

template <typename T>
std::vector<T> concatenate(const std::vector<std::vector<T>>& chunks) {
  std::vector<T> out;
  for (const auto& c : chunks) out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace secagg

#endif  // SECAGG_CODEC_HPP_
