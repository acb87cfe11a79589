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

#include "secagg/codec.hpp"

#include <cmath>
#include <string>

namespace secagg {
namespace {

unsigned ceil_log2(double x) {
  if (x <= 1.0) return 0;
  return static_cast<unsigned>(std::ceil(std::log2(x)));
}

}  // namespace

unsigned CodecConfig::headroom_bits() const {
  return 2 * (ceil_log2(static_cast<double>(max_parties)) + scale_bits +
              ceil_log2(magnitude_bound) + 1);
}

void CodecConfig::validate(unsigned key_bits) const {
  if (max_parties < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_parties must be >= 1");
  }
  if (!(magnitude_bound > 0.0) || !std::isfinite(magnitude_bound)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude_bound must be finite and positive");
  }
  if (headroom_bits() >= key_bits) {
    throw Error(ErrorCode::kInvalidArgument,
                "codec needs " + std::to_string(headroom_bits()) +
                    " bits of headroom but key has " + std::to_string(key_bits));
  }
}

EncodedVector encode(const CodecConfig& cfg, const mpz_class& modulus,
                     std::span<const double> values) {
  EncodedVector out;
  out.codec = cfg;
  out.elements.reserve(values.size());
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "gradient element is not finite");
    }
    if (std::fabs(x) > cfg.magnitude_bound) {
      throw Error(ErrorCode::kOutOfRange,
                  "gradient element " + std::to_string(x) + " exceeds bound");
    }
    // Scaling by a power of two is exact; round half away from zero.
    double scaled = std::round(std::ldexp(x, static_cast<int>(cfg.scale_bits)));
    mpz_class v(scaled);
    if (sgn(v) < 0) v += modulus;
    out.elements.push_back(std::move(v));
  }
  return out;
}

EncodedVector encode(const CodecConfig& cfg, const PublicKey& pk,
                     std::span<const double> values) {
  return encode(cfg, pk.n(), values);
}

mpz_class center(const mpz_class& residue, const mpz_class& modulus) {
  // Residues >= ceil(n/2) are negative.
  mpz_class half = (modulus + 1) / 2;
  return residue >= half ? mpz_class(residue - modulus) : residue;
}

std::vector<double> decode_sum(const CodecConfig& cfg, const mpz_class& modulus,
                               std::span<const mpz_class> residues,
                               unsigned parties) {
  if (parties < 1) {
    throw Error(ErrorCode::kInvalidArgument, "parties must be >= 1");
  }
  if (parties > cfg.max_parties) {
    throw Error(ErrorCode::kOutOfRange,
                "parties " + std::to_string(parties) + " exceeds max_parties " +
                    std::to_string(cfg.max_parties));
  }
  mpz_class denominator = mpz_class(parties) << cfg.scale_bits;
  std::vector<double> out;
  out.reserve(residues.size());
  for (const mpz_class& r : residues) {
    mpq_class q(center(r, modulus), denominator);
    q.canonicalize();
    out.push_back(q.get_d());
  }
  return out;
}

std::vector<double> decode_sum(const CodecConfig& cfg, const PublicKey& pk,
                               const EncodedVector& e, unsigned parties) {
  return decode_sum(cfg, pk.n(), e.elements, parties);
}

std::vector<ChunkBounds> chunk_bounds(std::size_t length, std::size_t parts) {
  if (parts == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot split into zero chunks");
  }
  std::vector<ChunkBounds> out;
  out.reserve(parts);
  const std::size_t base = length / parts;
  const std::size_t extra = length % parts;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    std::size_t size = base + (i < extra ? 1 : 0);
    out.push_back({offset, size});
    offset += size;
  }
  return out;
}

}  // namespace secagg
