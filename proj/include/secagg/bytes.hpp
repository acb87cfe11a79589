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

#ifndef SECAGG_BYTES_HPP_
#define SECAGG_BYTES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace secagg {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Appends big-endian integers and length-prefixed fields to a buffer.
class ByteWriter {
 public:
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void raw(ByteView bytes);
  // 2-byte length prefix.
  void str16(std::string_view s);

  std::size_t size() const { return buf_.size(); }
  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Bounds-checked big-endian reader; throws Error(kMalformedFrame) on underrun.
class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  ByteView raw(std::size_t n);
  std::string str16();

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  // Throws unless every byte has been consumed.
  void expect_end() const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

// Fixed-width big-endian, left-zero-padded. Throws kOutOfRange if v needs
// more than width bytes or is negative.
Bytes to_fixed_bytes(const mpz_class& v, std::size_t width);
void write_fixed_bytes(const mpz_class& v, std::span<std::uint8_t> out);
mpz_class from_bytes(ByteView bytes);

std::string to_hex(ByteView bytes);

// Constant-time equality for equal-length secrets.
bool constant_time_equal(ByteView a, ByteView b);

std::array<std::uint8_t, 32> sha256(ByteView data);

}  // namespace secagg

#endif  // SECAGG_BYTES_HPP_
