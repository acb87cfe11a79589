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

#include "secagg/paillier.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "secagg/error.hpp"

namespace secagg {
namespace {

constexpr unsigned kAllowedKeyBits[] = {512, 1024, 2048, 3072};

// Odd primes below 2000 for trial division.
const std::vector<unsigned long>& small_primes() {
  static const std::vector<unsigned long> primes = [] {
    std::vector<unsigned long> out;
    for (unsigned long c = 3; c < 2000; c += 2) {
      bool prime = true;
      for (unsigned long d : out) {
        if (d * d > c) break;
        if (c % d == 0) {
          prime = false;
          break;
        }
      }
      if (prime) out.push_back(c);
    }
    return out;
  }();
  return primes;
}

KeyFingerprint fingerprint_of(const mpz_class& n) {
  std::size_t width = (mpz_sizeinbase(n.get_mpz_t(), 2) + 7) / 8;
  auto digest = sha256(to_fixed_bytes(n, width));
  KeyFingerprint fp;
  std::copy_n(digest.begin(), fp.size(), fp.begin());
  return fp;
}

void check_key(const PublicKey& pk, const Ciphertext& c, const char* what) {
  if (c.key_fingerprint() != pk.fingerprint()) {
    throw Error(ErrorCode::kKeyMismatch,
                std::string(what) + ": ciphertext belongs to a different key");
  }
}

mpz_class lcm(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

mpz_class gcd(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

mpz_class invert(const mpz_class& a, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "value not invertible");
  }
  return out;
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

unsigned bit_length(const mpz_class& v) {
  return sgn(v) == 0 ? 0
                     : static_cast<unsigned>(mpz_sizeinbase(v.get_mpz_t(), 2));
}

}  // namespace

PublicKey::PublicKey(mpz_class n) : n_(std::move(n)) {
  if (n_ < 3 || mpz_even_p(n_.get_mpz_t())) {
    throw Error(ErrorCode::kInvalidArgument, "Paillier modulus must be odd and > 2");
  }
  n_squared_ = n_ * n_;
  key_bits_ = bit_length(n_);
  fingerprint_ = fingerprint_of(n_);
}

Bytes PublicKey::serialize() const {
  ByteWriter w;
  w.u32(key_bits_);
  w.raw(to_fixed_bytes(n_, modulus_bytes()));
  return w.take();
}

PublicKey PublicKey::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  std::uint32_t bits = r.u32();
  if (bits < 2 || bits > 16384) {
    throw Error(ErrorCode::kMalformedFrame, "public key size out of range");
  }
  mpz_class n = from_bytes(r.raw((bits + 7) / 8));
  r.expect_end();
  if (bit_length(n) != bits) {
    throw Error(ErrorCode::kMalformedFrame, "public key size does not match modulus");
  }
  return PublicKey(std::move(n));
}

PrivateKey::PrivateKey(const mpz_class& p, const mpz_class& q)
    : public_key_(p * q), p_(p), q_(q) {
  if (p_ == q_) {
    throw Error(ErrorCode::kInvalidArgument, "p and q must differ");
  }
  unsigned bp = bit_length(p_), bq = bit_length(q_);
  if ((bp > bq ? bp - bq : bq - bp) > 1) {
    throw Error(ErrorCode::kInvalidArgument, "p and q differ in size by more than one bit");
  }
  p_minus_1_ = p_ - 1;
  q_minus_1_ = q_ - 1;
  const mpz_class& n = public_key_.n();
  if (gcd(n, p_minus_1_ * q_minus_1_) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "gcd(pq, (p-1)(q-1)) != 1");
  }
  lambda_ = lcm(p_minus_1_, q_minus_1_);
  // With g = n + 1, g^lambda = 1 + lambda*n (mod n^2), so L(.) = lambda mod n.
  mpz_class g_lambda = powm(n + 1, lambda_, public_key_.n_squared());
  mpz_class l_value = (g_lambda - 1) / n;
  mu_ = invert(l_value, n);

  p_squared_ = p_ * p_;
  q_squared_ = q_ * q_;
  hp_ = invert((powm(n + 1, p_minus_1_, p_squared_) - 1) / p_, p_);
  hq_ = invert((powm(n + 1, q_minus_1_, q_squared_) - 1) / q_, q_);
  q_inv_p_ = invert(q_, p_);
}

mpz_class PrivateKey::decrypt(const mpz_class& c) const {
  mpz_class mp = (powm(c, p_minus_1_, p_squared_) - 1) / p_;
  mp = (mp * hp_) % p_;
  mpz_class mq = (powm(c, q_minus_1_, q_squared_) - 1) / q_;
  mq = (mq * hq_) % q_;
  mpz_class h = ((mp - mq) * q_inv_p_) % p_;
  if (sgn(h) < 0) h += p_;
  return mq + h * q_;
}

mpz_class PrivateKey::decrypt_textbook(const mpz_class& c) const {
  const mpz_class& n = public_key_.n();
  mpz_class u = powm(c, lambda_, public_key_.n_squared());
  return (((u - 1) / n) * mu_) % n;
}

void Ciphertext::serialize_into(const PublicKey& pk,
                                std::span<std::uint8_t> out) const {
  check_key(pk, *this, "serialize");
  if (out.size() != pk.ciphertext_bytes()) {
    throw Error(ErrorCode::kLengthMismatch, "ciphertext buffer has wrong width");
  }
  write_fixed_bytes(value_, out);
}

Bytes Ciphertext::serialize(const PublicKey& pk) const {
  Bytes out(pk.ciphertext_bytes());
  serialize_into(pk, out);
  return out;
}

Ciphertext Ciphertext::deserialize(const PublicKey& pk, ByteView bytes) {
  if (bytes.size() != pk.ciphertext_bytes()) {
    throw Error(ErrorCode::kLengthMismatch, "ciphertext has wrong width");
  }
  mpz_class v = from_bytes(bytes);
  if (sgn(v) == 0 || v >= pk.n_squared() || gcd(v, pk.n()) != 1) {
    throw Error(ErrorCode::kOutOfRange, "ciphertext outside Z*_{n^2}");
  }
  return Ciphertext(std::move(v), pk.fingerprint());
}

bool is_probable_prime(const mpz_class& n, int rounds, RandomSource& rng) {
  if (n < 2) return false;
  for (unsigned long p : {2ul, 3ul, 5ul, 7ul}) {
    if (n == p) return true;
  }
  if (mpz_even_p(n.get_mpz_t())) return false;
  for (unsigned long p : small_primes()) {
    if (n == p) return true;
    if (mpz_fdiv_ui(n.get_mpz_t(), p) == 0) return false;
  }
  // n - 1 = d * 2^s with d odd.
  mpz_class n_minus_1 = n - 1;
  unsigned long s = mpz_scan1(n_minus_1.get_mpz_t(), 0);
  mpz_class d;
  mpz_fdiv_q_2exp(d.get_mpz_t(), n_minus_1.get_mpz_t(), s);
  mpz_class base_range = n - 3;  // bases in [2, n - 2]
  for (int i = 0; i < rounds; ++i) {
    mpz_class a = rng.uniform_below(base_range) + 2;
    mpz_class x = powm(a, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (unsigned long j = 1; j < s; ++j) {
      x = (x * x) % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

mpz_class generate_prime(unsigned bits, RandomSource& rng) {
  if (bits < 4) {
    throw Error(ErrorCode::kInvalidArgument, "prime size too small");
  }
  for (;;) {
    mpz_class candidate = rng.random_bits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (is_probable_prime(candidate, kMillerRabinRounds, rng)) return candidate;
  }
}

KeyPair generate_keypair(unsigned key_bits, RandomSource& rng) {
  if (std::find(std::begin(kAllowedKeyBits), std::end(kAllowedKeyBits),
                key_bits) == std::end(kAllowedKeyBits)) {
    throw Error(ErrorCode::kInvalidArgument,
                "key_bits must be 512, 1024, 2048 or 3072, got " +
                    std::to_string(key_bits));
  }
  for (;;) {
    mpz_class p = generate_prime(key_bits / 2, rng);
    mpz_class q = generate_prime(key_bits / 2, rng);
    if (p == q) continue;
    // Top-two-bit primes make n exactly key_bits long.
    mpz_class n = p * q;
    if (bit_length(n) != key_bits) continue;
    if (gcd(n, (p - 1) * (q - 1)) != 1) continue;
    PrivateKey sk(p, q);
    PublicKey pk = sk.public_key();
    return KeyPair{std::move(pk), std::move(sk)};
  }
}

KeyPair generate_keypair(unsigned key_bits) {
  SystemRandom rng;
  return generate_keypair(key_bits, rng);
}

KeyPair generate_keypair(unsigned key_bits, const Seed& seed) {
  SeededRandom rng(seed);
  return generate_keypair(key_bits, rng);
}

KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q) {
  SeededRandom rng(derive_seed("secagg/prime-check", 0));
  if (!is_probable_prime(p, kMillerRabinRounds, rng) ||
      !is_probable_prime(q, kMillerRabinRounds, rng)) {
    throw Error(ErrorCode::kInvalidArgument, "p and q must be prime");
  }
  PrivateKey sk(p, q);
  PublicKey pk = sk.public_key();
  return KeyPair{std::move(pk), std::move(sk)};
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   const mpz_class& r) {
  const mpz_class& n = pk.n();
  if (sgn(m) < 0 || m >= n) {
    throw Error(ErrorCode::kOutOfRange, "plaintext outside [0, n)");
  }
  if (r < 1 || r >= n || gcd(r, n) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "nonce must be in Z*_n");
  }
  const mpz_class& n2 = pk.n_squared();
  mpz_class gm = (1 + m * n) % n2;
  mpz_class value = (gm * powm(r, n, n2)) % n2;
  return Ciphertext(std::move(value), pk.fingerprint());
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng) {
  const mpz_class& n = pk.n();
  mpz_class r;
  do {
    r = rng.uniform_below(n);
  } while (sgn(r) == 0 || gcd(r, n) != 1);
  return encrypt(pk, m, r);
}

CiphertextVector encrypt_vector(const PublicKey& pk,
                                std::span<const mpz_class> plaintexts,
                                RandomSource& rng) {
  CiphertextVector out;
  out.reserve(plaintexts.size());
  for (const mpz_class& m : plaintexts) out.push_back(encrypt(pk, m, rng));
  return out;
}

namespace {

void check_decryptable(const PrivateKey& sk, const Ciphertext& c) {
  const PublicKey& pk = sk.public_key();
  check_key(pk, c, "decrypt");
  if (sgn(c.value()) <= 0 || c.value() >= pk.n_squared() ||
      gcd(c.value(), pk.n()) != 1) {
    throw Error(ErrorCode::kOutOfRange, "ciphertext not coprime with n^2");
  }
}

}  // namespace

mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c) {
  check_decryptable(sk, c);
  return sk.decrypt(c.value());
}

mpz_class decrypt_textbook(const PrivateKey& sk, const Ciphertext& c) {
  check_decryptable(sk, c);
  return sk.decrypt_textbook(c.value());
}

std::vector<mpz_class> decrypt_vector(const PrivateKey& sk,
                                      std::span<const Ciphertext> cs) {
  std::vector<mpz_class> out;
  out.reserve(cs.size());
  for (const Ciphertext& c : cs) out.push_back(decrypt(sk, c));
  return out;
}

Ciphertext add_ciphertexts(const PublicKey& pk, const Ciphertext& a,
                           const Ciphertext& b) {
  check_key(pk, a, "add");
  check_key(pk, b, "add");
  return Ciphertext((a.value() * b.value()) % pk.n_squared(), pk.fingerprint());
}

CiphertextVector add_vectors(const PublicKey& pk,
                             std::span<const Ciphertext> a,
                             std::span<const Ciphertext> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "add_vectors: lengths " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  CiphertextVector out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(add_ciphertexts(pk, a[i], b[i]));
  }
  return out;
}

void accumulate(const PublicKey& pk, CiphertextVector& acc,
                std::span<const Ciphertext> b) {
  acc = add_vectors(pk, acc, b);
}

Bytes serialize_ciphertexts(const PublicKey& pk,
                            std::span<const Ciphertext> cs) {
  const std::size_t width = pk.ciphertext_bytes();
  Bytes out(width * cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    cs[i].serialize_into(pk, std::span<std::uint8_t>(out).subspan(i * width, width));
  }
  return out;
}

CiphertextVector deserialize_ciphertexts(const PublicKey& pk, ByteView bytes,
                                         std::size_t count) {
  const std::size_t width = pk.ciphertext_bytes();
  if (bytes.size() != width * count) {
    throw Error(ErrorCode::kLengthMismatch, "ciphertext block has wrong size");
  }
  CiphertextVector out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(Ciphertext::deserialize(pk, bytes.subspan(i * width, width)));
  }
  return out;
}

}  // namespace secagg
