// Copyright 2026 The diffqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diffqec/bit_vector.hpp"

#include <stdexcept>

namespace diffqec {

BitVector::BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::uint8_t b : bits_) {
    if (b > 1) throw std::invalid_argument("BitVector entries must be 0 or 1");
  }
}

void BitVector::set(std::size_t i, std::uint8_t v) {
  if (v > 1) throw std::invalid_argument("BitVector entries must be 0 or 1");
  bits_[i] = v;
}

void BitVector::xor_with(const BitVector& other) {
  if (other.size() != size()) throw std::invalid_argument("BitVector length mismatch in xor");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other.bits_[i];
}

std::size_t BitVector::weight() const {
  std::size_t w = 0;
  for (std::uint8_t b : bits_) w += b;
  return w;
}

std::uint8_t BitVector::dot(const BitVector& other) const {
  if (other.size() != size()) throw std::invalid_argument("BitVector length mismatch in dot");
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) acc ^= (bits_[i] & other.bits_[i]);
  return acc;
}

std::uint64_t BitVector::to_u64() const {
  if (size() > 64) throw std::invalid_argument("BitVector too long for to_u64");
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) w |= (1ULL << i);
  }
  return w;
}

BitVector BitVector::from_u64(std::uint64_t word, std::size_t len) {
  if (len > 64) throw std::invalid_argument("BitVector too long for from_u64");
  BitVector v(len);
  for (std::size_t i = 0; i < len; ++i) v.bits_[i] = (word >> i) & 1;
  return v;
}

std::string BitVector::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

BitVector operator^(const BitVector& a, const BitVector& b) {
  BitVector out = a;
  out.xor_with(b);
  return out;
}

void BinaryMatrix::set(std::size_t r, std::size_t c, std::uint8_t v) {
  if (v > 1) throw std::invalid_argument("BinaryMatrix entries must be 0 or 1");
  a_[r * cols_ + c] = v;
}

BitVector BinaryMatrix::row(std::size_t r) const {
  BitVector out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out.set(c, at(r, c));
  return out;
}

BitVector BinaryMatrix::mul(const BitVector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("BinaryMatrix::mul dimension mismatch");
  BitVector y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::uint8_t acc = 0;
    const std::uint8_t* row_ptr = a_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) acc ^= (row_ptr[c] & x.bit(c));
    y.set(r, acc);
  }
  return y;
}

}  // namespace diffqec
