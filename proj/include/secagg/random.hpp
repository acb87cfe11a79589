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

#ifndef SECAGG_RANDOM_HPP_
#define SECAGG_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include <gmpxx.h>

namespace secagg {

using Seed = std::array<std::uint8_t, 32>;

// Source of random bytes. Implementations are not thread-safe; give each
// thread (or learner) its own instance.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  // Uniform in [0, bound). bound must be positive.
  mpz_class uniform_below(const mpz_class& bound);
  // Uniform integer with exactly the low 'bits' bits random.
  mpz_class random_bits(unsigned bits);
};

// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// ChaCha20 keystream keyed by a 32-byte seed. Used for reproducible keys and
// replayable simulations; never for production key material.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(const Seed& seed);
  ~SeededRandom() override;
  SeededRandom(const SeededRandom&) = delete;
  SeededRandom& operator=(const SeededRandom&) = delete;

  void fill(std::span<std::uint8_t> out) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Domain-separated seed: SHA-256(label || be64(value)).
Seed derive_seed(std::string_view label, std::uint64_t value);
Seed derive_seed(const Seed& parent, std::string_view label);

}  // namespace secagg

#endif  // SECAGG_RANDOM_HPP_
