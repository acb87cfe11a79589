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

#include "secagg/bytes.hpp"

#include <bit>
#include <cstring>

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "secagg/error.hpp"

namespace secagg {

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(v); }

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::raw(ByteView bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::str16(std::string_view s) {
  if (s.size() > 0xFFFF) {
    throw Error(ErrorCode::kOutOfRange, "string field longer than 65535 bytes");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

ByteView ByteReader::raw(std::size_t n) {
  if (remaining() < n) {
    throw Error(ErrorCode::kMalformedFrame, "truncated field");
  }
  ByteView out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16() {
  ByteView b = raw(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32() {
  ByteView b = raw(4);
  std::uint32_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t ByteReader::u64() {
  ByteView b = raw(8);
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str16() {
  std::uint16_t len = u16();
  ByteView b = raw(len);
  return std::string(b.begin(), b.end());
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw Error(ErrorCode::kMalformedFrame, "trailing bytes in payload");
  }
}

void write_fixed_bytes(const mpz_class& v, std::span<std::uint8_t> out) {
  if (sgn(v) < 0) {
    throw Error(ErrorCode::kOutOfRange, "cannot serialize negative integer");
  }
  std::size_t needed = sgn(v) == 0 ? 0 : (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (needed > out.size()) {
    throw Error(ErrorCode::kOutOfRange, "integer wider than field");
  }
  std::memset(out.data(), 0, out.size() - needed);
  if (needed > 0) {
    std::size_t written = 0;
    mpz_export(out.data() + (out.size() - needed), &written, 1, 1, 1, 0,
               v.get_mpz_t());
  }
}

Bytes to_fixed_bytes(const mpz_class& v, std::size_t width) {
  Bytes out(width);
  write_fixed_bytes(v, out);
  return out;
}

mpz_class from_bytes(ByteView bytes) {
  mpz_class v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return v;
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::array<std::uint8_t, 32> sha256(ByteView data) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != digest.size()) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  return digest;
}

}  // namespace secagg
