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

#include "secagg/random.hpp"

#include <string>
#include <vector>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "secagg/bytes.hpp"
#include "secagg/error.hpp"

namespace secagg {

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> buf;
  fill(buf);
  std::uint64_t v = 0;
  for (std::uint8_t b : buf) v = (v << 8) | b;
  return v;
}

mpz_class RandomSource::random_bits(unsigned bits) {
  if (bits == 0) return 0;
  std::vector<std::uint8_t> buf((bits + 7) / 8);
  fill(buf);
  unsigned excess = static_cast<unsigned>(buf.size() * 8 - bits);
  buf[0] &= static_cast<std::uint8_t>(0xFF >> excess);
  return from_bytes(buf);
}

mpz_class RandomSource::uniform_below(const mpz_class& bound) {
  if (sgn(bound) <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "uniform_below needs a positive bound");
  }
  unsigned bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  // Rejection sampling; expected iterations < 2.
  for (;;) {
    mpz_class candidate = random_bits(bits);
    if (candidate < bound) return candidate;
  }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(ErrorCode::kIo, "RAND_bytes failed");
  }
}

struct SeededRandom::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  std::vector<std::uint8_t> zeros;
};

SeededRandom::SeededRandom(const Seed& seed) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  std::array<std::uint8_t, 16> iv{};
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_chacha20(), nullptr, seed.data(),
                         iv.data()) != 1) {
    throw Error(ErrorCode::kIo, "ChaCha20 init failed");
  }
}

SeededRandom::~SeededRandom() { EVP_CIPHER_CTX_free(impl_->ctx); }

void SeededRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (impl_->zeros.size() < out.size()) impl_->zeros.resize(out.size());
  int written = 0;
  if (EVP_EncryptUpdate(impl_->ctx, out.data(), &written, impl_->zeros.data(),
                        static_cast<int>(out.size())) != 1 ||
      written != static_cast<int>(out.size())) {
    throw Error(ErrorCode::kIo, "ChaCha20 keystream failed");
  }
}

Seed derive_seed(std::string_view label, std::uint64_t value) {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
  w.u64(value);
  return sha256(w.bytes());
}

Seed derive_seed(const Seed& parent, std::string_view label) {
  ByteWriter w;
  w.raw(parent);
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
  return sha256(w.bytes());
}

}  // namespace secagg
