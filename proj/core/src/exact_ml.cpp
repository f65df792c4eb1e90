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

#include "diffqec/exact_ml.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace diffqec {

namespace {

// Packs a parity-check matrix into per-row bit masks over qubits.
std::vector<std::uint32_t> row_masks(const BinaryMatrix& m) {
  std::vector<std::uint32_t> masks(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.at(r, c)) masks[r] |= (1u << c);
    }
  }
  return masks;
}

std::uint32_t syndrome_bits(const std::vector<std::uint32_t>& masks, std::uint32_t err) {
  std::uint32_t s = 0;
  for (std::size_t r = 0; r < masks.size(); ++r) {
    s |= static_cast<std::uint32_t>(std::popcount(masks[r] & err) & 1) << r;
  }
  return s;
}

std::uint32_t mask_of(const BitVector& v) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.bit(i)) m |= (1u << i);
  }
  return m;
}

}  // namespace

std::size_t ChannelTable::syndrome_index(const BitVector& s_x, const BitVector& s_z) const {
  if (s_x.size() != static_cast<std::size_t>(n_x_stabs) ||
      s_z.size() != static_cast<std::size_t>(n_z_stabs)) {
    throw std::invalid_argument("ChannelTable: syndrome length mismatch");
  }
  return (static_cast<std::size_t>(s_x.to_u64()) << n_z_stabs) | s_z.to_u64();
}

double ChannelTable::exact_ml_ler() const {
  double wrong = 0.0;
  for (std::size_t s = 0; s < syndrome_count(); ++s) {
    double total = 0.0, best = 0.0;
    for (std::size_t c = 0; c < class_count(); ++c) {
      double p = probability(s, c);
      total += p;
      if (p > best) best = p;
    }
    wrong += total - best;
  }
  return wrong;
}

ChannelTable enumerate_channel(const SurfaceCode& code, const NoiseModel& noise, int label_bits) {
  noise.validate();
  if (code.distance != 3) {
    throw std::invalid_argument("enumerate_channel: exact enumeration supports d = 3 only");
  }
  if (noise.kind != NoiseKind::code_capacity_depolarizing) {
    throw std::invalid_argument("enumerate_channel: code-capacity noise only");
  }
  if (label_bits != 1 && label_bits != 2) {
    throw std::invalid_argument("enumerate_channel: label_bits must be 1 or 2");
  }

  const int n = code.n_data;  // 9
  const auto hx = row_masks(code.h_x);
  const auto hz = row_masks(code.h_z);
  const std::uint32_t lx = mask_of(code.logical_x);
  const std::uint32_t lz = mask_of(code.logical_z);

  ChannelTable table;
  table.n_x_stabs = static_cast<int>(hx.size());
  table.n_z_stabs = static_cast<int>(hz.size());
  table.label_bits = label_bits;
  table.joint.assign(table.syndrome_count() * table.class_count(), 0.0);

  const double p = noise.p_phys;
  // P(pattern) depends only on the number of non-identity qubits.
  std::vector<double> weight_prob(static_cast<std::size_t>(n) + 1);
  for (int w = 0; w <= n; ++w) {
    weight_prob[static_cast<std::size_t>(w)] =
        std::pow(1.0 - p, n - w) * std::pow(p / 3.0, w);
  }

  // Z-syndrome and label bit 0 depend only on the X component; precompute.
  const std::uint32_t patterns = 1u << n;
  std::vector<std::uint32_t> sz_of(patterns);
  std::vector<std::uint8_t> bit0_of(patterns);
  for (std::uint32_t xe = 0; xe < patterns; ++xe) {
    sz_of[xe] = syndrome_bits(hz, xe);
    bit0_of[xe] = static_cast<std::uint8_t>(std::popcount(lz & xe) & 1);
  }

  for (std::uint32_t xe = 0; xe < patterns; ++xe) {
    for (std::uint32_t ze = 0; ze < patterns; ++ze) {
      int w = std::popcount(xe | ze);
      double prob = weight_prob[static_cast<std::size_t>(w)];
      std::uint32_t sx = syndrome_bits(hx, ze);
      std::size_t syndrome_idx = (static_cast<std::size_t>(sx) << table.n_z_stabs) | sz_of[xe];
      std::size_t cls = bit0_of[xe];
      if (label_bits == 2) cls |= static_cast<std::size_t>(std::popcount(lx & ze) & 1) << 1;
      table.joint[syndrome_idx * table.class_count() + cls] += prob;
    }
  }
  return table;
}

MlResult ml_decode_bruteforce(const SurfaceCode& code, const NoiseModel& noise,
                              const BitVector& s_x, const BitVector& s_z, int label_bits) {
  ChannelTable table = enumerate_channel(code, noise, label_bits);
  std::size_t idx = table.syndrome_index(s_x, s_z);

  MlResult result;
  result.class_posteriors.resize(table.class_count(), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < table.class_count(); ++c) total += table.probability(idx, c);
  std::size_t best = 0;
  if (total > 0.0) {
    double best_p = -1.0;
    for (std::size_t c = 0; c < table.class_count(); ++c) {
      double post = table.probability(idx, c) / total;
      result.class_posteriors[c] = post;
      if (post > best_p) {
        best_p = post;
        best = c;
      }
    }
  } else {
    result.class_posteriors[0] = 1.0;  // unreachable syndrome: trivial class
  }
  result.label = BitVector::from_u64(best, static_cast<std::size_t>(label_bits));
  return result;
}

LookupDecoder::LookupDecoder(const SurfaceCode& code, const NoiseModel& noise, int label_bits)
    : table_(enumerate_channel(code, noise, label_bits)) {
  const std::size_t n_syndromes = table_.syndrome_count();
  labels_.resize(n_syndromes);
  posteriors_.resize(n_syndromes);
  for (std::size_t s = 0; s < n_syndromes; ++s) {
    double total = 0.0;
    for (std::size_t c = 0; c < table_.class_count(); ++c) total += table_.probability(s, c);
    std::vector<double> post(table_.class_count(), 0.0);
    std::size_t best = 0;
    if (total > 0.0) {
      double best_p = -1.0;
      for (std::size_t c = 0; c < table_.class_count(); ++c) {
        post[c] = table_.probability(s, c) / total;
        if (post[c] > best_p) {
          best_p = post[c];
          best = c;
        }
      }
    } else {
      post[0] = 1.0;
    }
    labels_[s] = BitVector::from_u64(best, static_cast<std::size_t>(table_.label_bits));
    posteriors_[s] = std::move(post);
  }
}

const BitVector& LookupDecoder::decode(const BitVector& s_x, const BitVector& s_z) const {
  return labels_[table_.syndrome_index(s_x, s_z)];
}

const std::vector<double>& LookupDecoder::posterior(const BitVector& s_x, const BitVector& s_z) const {
  return posteriors_[table_.syndrome_index(s_x, s_z)];
}

}  // namespace diffqec
