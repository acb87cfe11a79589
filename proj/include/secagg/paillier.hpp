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

// Paillier cryptosystem with generator g = n + 1 and CRT decryption.
//
//   Enc(m; r) = (1 + m*n) * r^n mod n^2
//   Dec(c)    = L(c^lambda mod n^2) * mu mod n,   L(x) = (x - 1) / n
//
// Multiplying ciphertexts adds plaintexts modulo n. Keys and ciphertexts are
// immutable values and may be shared freely between threads.

#ifndef SECAGG_PAILLIER_HPP_
#define SECAGG_PAILLIER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "secagg/bytes.hpp"
#include "secagg/random.hpp"

namespace secagg {

// First 8 bytes of SHA-256 over the big-endian bytes of n.
using KeyFingerprint = std::array<std::uint8_t, 8>;

class PublicKey {
 public:
  explicit PublicKey(mpz_class n);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n_squared_; }
  unsigned key_bits() const { return key_bits_; }
  const KeyFingerprint& fingerprint() const { return fingerprint_; }

  // ceil(key_bits / 8).
  std::size_t modulus_bytes() const { return (key_bits_ + 7) / 8; }
  // Fixed wire width of one ciphertext.
  std::size_t ciphertext_bytes() const { return 2 * modulus_bytes(); }

  // 4-byte big-endian key_bits, then modulus_bytes() of n.
  Bytes serialize() const;
  static PublicKey deserialize(ByteView bytes);

  friend bool operator==(const PublicKey& a, const PublicKey& b) {
    return a.n_ == b.n_;
  }

 private:
  mpz_class n_;
  mpz_class n_squared_;
  unsigned key_bits_;
  KeyFingerprint fingerprint_;
};

class PrivateKey {
 public:
  // p and q must be distinct primes of (nearly) equal size.
  PrivateKey(const mpz_class& p, const mpz_class& q);

  const PublicKey& public_key() const { return public_key_; }
  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }

  // CRT path.
  mpz_class decrypt(const mpz_class& c) const;
  // L-function path, kept for differential testing.
  mpz_class decrypt_textbook(const mpz_class& c) const;

 private:
  PublicKey public_key_;
  mpz_class p_, q_;
  mpz_class lambda_, mu_;
  // CRT cache.
  mpz_class p_squared_, q_squared_;
  mpz_class p_minus_1_, q_minus_1_;
  mpz_class hp_, hq_;
  mpz_class q_inv_p_;
};

struct KeyPair {
  PublicKey public_key;
  PrivateKey private_key;
};

class Ciphertext {
 public:
  Ciphertext(mpz_class value, const KeyFingerprint& key)
      : value_(std::move(value)), key_(key) {}

  const mpz_class& value() const { return value_; }
  const KeyFingerprint& key_fingerprint() const { return key_; }

  // Exactly pk.ciphertext_bytes() bytes, big-endian.
  Bytes serialize(const PublicKey& pk) const;
  void serialize_into(const PublicKey& pk, std::span<std::uint8_t> out) const;
  // Checks the range [1, n^2) and coprimality with n.
  static Ciphertext deserialize(const PublicKey& pk, ByteView bytes);

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.key_ == b.key_ && a.value_ == b.value_;
  }

 private:
  mpz_class value_;
  KeyFingerprint key_;
};

using CiphertextVector = std::vector<Ciphertext>;

inline constexpr int kMillerRabinRounds = 64;

// key_bits must be one of 512, 1024, 2048, 3072.
KeyPair generate_keypair(unsigned key_bits, RandomSource& rng);
KeyPair generate_keypair(unsigned key_bits);
KeyPair generate_keypair(unsigned key_bits, const Seed& seed);
// Test hook: builds a key pair from caller-chosen primes.
KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q);

bool is_probable_prime(const mpz_class& n, int rounds, RandomSource& rng);
// Prime with exactly 'bits' bits and the top two bits set.
mpz_class generate_prime(unsigned bits, RandomSource& rng);

// Requires 0 <= m < n. Draws r uniformly from Z*_n.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng);
// Requires 1 <= r < n and gcd(r, n) = 1.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   const mpz_class& r);
CiphertextVector encrypt_vector(const PublicKey& pk,
                                std::span<const mpz_class> plaintexts,
                                RandomSource& rng);

mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c);
mpz_class decrypt_textbook(const PrivateKey& sk, const Ciphertext& c);
std::vector<mpz_class> decrypt_vector(const PrivateKey& sk,
                                      std::span<const Ciphertext> cs);

Ciphertext add_ciphertexts(const PublicKey& pk, const Ciphertext& a,
                           const Ciphertext& b);
CiphertextVector add_vectors(const PublicKey& pk,
                             std::span<const Ciphertext> a,
                             std::span<const Ciphertext> b);
// In-place a[i] <- a[i] (+) b[i].
void accumulate(const PublicKey& pk, CiphertextVector& acc,
                std::span<const Ciphertext> b);

Bytes serialize_ciphertexts(const PublicKey& pk,
                            std::span<const Ciphertext> cs);
CiphertextVector deserialize_ciphertexts(const PublicKey& pk, ByteView bytes,
                                         std::size_t count);

}  // namespace secagg

#endif  // SECAGG_PAILLIER_HPP_
