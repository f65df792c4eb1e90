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

#ifndef DIFFQEC_BIT_VECTOR_HPP
#define DIFFQEC_BIT_VECTOR_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace diffqec {

/// Fixed-length vector over GF(2). Length is set at construction and never
/// changes; entries are stored one byte per bit, always 0 or 1.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t len) : bits_(len, 0) {}
  explicit BitVector(std::vector<std::uint8_t> bits);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  std::uint8_t bit(std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, std::uint8_t v);
  void flip(std::size_t i) { bits_[i] ^= 1; }

  /// In-place GF(2) sum. Lengths must match.
  void xor_with(const BitVector& other);

  std::size_t weight() const;

  /// Inner product mod 2. Lengths must match.
  std::uint8_t dot(const BitVector& other) const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Packs bit i into position i of a 64-bit word. Requires size() <= 64.
  std::uint64_t to_u64() const;
  static BitVector from_u64(std::uint64_t word, std::size_t len);

  std::string to_string() const;  // e.g. "010011"

  bool operator==(const BitVector& other) const { return bits_ == other.bits_; }
  bool operator!=(const BitVector& other) const { return bits_ != other.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

BitVector operator^(const BitVector& a, const BitVector& b);

/// Dense binary matrix for parity checks; row-major, one byte per entry.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint8_t at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, std::uint8_t v);

  BitVector row(std::size_t r) const;

  /// y = M x over GF(2); x must have length cols().
  BitVector mul(const BitVector& x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> a_;
};

}  // namespace diffqec

#endif  // DIFFQEC_BIT_VECTOR_HPP
