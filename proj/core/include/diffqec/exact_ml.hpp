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

#ifndef DIFFQEC_EXACT_ML_HPP
#define DIFFQEC_EXACT_ML_HPP

#include <vector>

#include "diffqec/bit_vector.hpp"
#include "diffqec/noise_sim.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

/// Exact joint channel distribution P(syndrome, logical class) for d = 3
/// code-capacity depolarizing noise, computed by enumerating all 4^9 Pauli
/// patterns. Logical classes index the 2^L possible labels.
struct ChannelTable {
  int n_x_stabs = 0;
  int n_z_stabs = 0;
  int label_bits = 1;
  // joint[(sx << n_z_stabs | sz) * (1 << L) + class] = probability
  std::vector<double> joint;

  std::size_t syndrome_count() const { return 1ULL << (n_x_stabs + n_z_stabs); }
  std::size_t class_count() const { return 1ULL << label_bits; }
  double probability(std::size_t syndrome_idx, std::size_t cls) const {
    return joint[syndrome_idx * class_count() + cls];
  }
  std::size_t syndrome_index(const BitVector& s_x, const BitVector& s_z) const;

  /// Exact logical error rate of the maximum-likelihood decision rule.
  double exact_ml_ler() const;
};

/// Enumerates the full channel. Requires d = 3 and code-capacity noise.
ChannelTable enumerate_channel(const SurfaceCode& code, const NoiseModel& noise,
                               int label_bits = 1);

struct MlResult {
  BitVector label;
  std::vector<double> class_posteriors;  // size 2^L, sums to 1
};

/// Brute-force maximum-likelihood coset decoding of one syndrome: posterior
/// over logical classes by exact enumeration, label = argmax (ties to the
/// lower class index; a zero-probability syndrome yields the trivial
/// class).
MlResult ml_decode_bruteforce(const SurfaceCode& code, const NoiseModel& noise,
                              const BitVector& s_x, const BitVector& s_z, int label_bits = 1);

/// O(1) decoder precomputed from the same enumeration, one entry per
/// syndrome; rows index X-syndromes and columns Z-syndromes.
class LookupDecoder {
 public:
  LookupDecoder(const SurfaceCode& code, const NoiseModel& noise, int label_bits = 1);

  const BitVector& decode(const BitVector& s_x, const BitVector& s_z) const;
  const std::vector<double>& posterior(const BitVector& s_x, const BitVector& s_z) const;

  std::size_t rows() const { return 1ULL << table_.n_x_stabs; }  // per-X-type syndromes
  std::size_t cols() const { return 1ULL << table_.n_z_stabs; }  // per-Z-type syndromes
  const ChannelTable& table() const { return table_; }

 private:
  ChannelTable table_;
  std::vector<BitVector> labels_;
  std::vector<std::vector<double>> posteriors_;
};

}  // namespace diffqec

#endif  // DIFFQEC_EXACT_ML_HPP
