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

#include "diffqec/decode.hpp"

#include <algorithm>
#include <stdexcept>

#include "diffqec/diffusion.hpp"
#include "diffqec/tape.hpp"

namespace diffqec {

namespace {

void check_grid(const DenoiserParams& params, GridView grid) {
  if (grid.data == nullptr || grid.rounds < 1) throw std::invalid_argument("decode: empty grid");
  if (grid.grid_size != params.config.grid_size()) {
    throw std::invalid_argument("decode: grid size does not match denoiser config");
  }
}

// Trunk-only forward given a precomputed syndrome feature.
std::vector<double> trunk_logits(const DenoiserParams& params, std::span<const double> c,
                                 const BitVector& x_t, int t) {
  Tape tape;
  const int l = params.config.label_bits;
  Tensor xt_t(Shape{1, l});
  for (int i = 0; i < l; ++i) xt_t.v[static_cast<std::size_t>(i)] = x_t.bit(static_cast<std::size_t>(i));
  int xt_id = tape.leaf(std::move(xt_t));
  Tensor temb_t(Shape{1, params.config.time_embed_dim});
  temb_t.v = time_embedding(t, params.config.time_embed_dim);
  int temb_id = tape.leaf(std::move(temb_t));
  Tensor c_t(Shape{1, params.config.hidden});
  std::copy(c.begin(), c.end(), c_t.v.begin());
  int c_id = tape.leaf(std::move(c_t));
  int h0 = encode_inputs(tape, xt_id, temb_id, c_id, params);
  int logits = denoise_trunk(tape, h0, c_id, params);
  return tape.value(logits).v;
}

}  // namespace

std::vector<double> syndrome_feature(const DenoiserParams& params, GridView grid) {
  check_grid(params, grid);
  Tape tape;
  Tensor grid_t(Shape{grid.rounds, 2, grid.grid_size, grid.grid_size});
  for (std::size_t i = 0; i < grid.numel(); ++i) grid_t.v[i] = static_cast<double>(grid.data[i]);
  int grid_id = tape.leaf(std::move(grid_t));
  int feats = encode_rounds(tape, grid_id, params);
  int c = aggregate_temporal(tape, feats, /*n=*/1, grid.rounds, params);
  return tape.value(c).v;
}

DecodeOutcome decode_shot(const DenoiserParams& params, const NoiseSchedule& schedule,
                          GridView grid, Rng& rng, int chains) {
  check_grid(params, grid);
  if (schedule.horizon != params.config.horizon) {
    throw std::invalid_argument("decode: schedule horizon does not match denoiser config");
  }
  const int m = chains > 0 ? chains : params.config.chains;
  const int horizon = schedule.horizon;
  const std::size_t l = static_cast<std::size_t>(params.config.label_bits);

  std::vector<double> c = syndrome_feature(params, grid);

  std::vector<BitVector> chain_labels(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> chain_p0(static_cast<std::size_t>(m));
  for (int chain = 0; chain < m; ++chain) {
    BitVector x = sample_prior(l, rng);
    for (int t = horizon; t >= 2; --t) {
      std::vector<double> logits = trunk_logits(params, c, x, t);
      std::vector<double> p0 = softmax_pair_one(logits);
      x = reverse_step(x, t, p0, schedule, rng);
    }
    std::vector<double> logits = trunk_logits(params, c, x, 1);
    chain_labels[static_cast<std::size_t>(chain)] = finalize(logits);
    chain_p0[static_cast<std::size_t>(chain)] = softmax_pair_one(logits);
  }

  DecodeOutcome out;
  out.label = BitVector(l);
  out.bit_confidence.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    int ones = 0;
    for (int chain = 0; chain < m; ++chain) ones += chain_labels[static_cast<std::size_t>(chain)].bit(i);
    const std::uint8_t bit = (2 * ones > m) ? 1 : 0;  // ties -> 0
    out.label.set(i, bit);
    double conf = 0.0;
    for (int chain = 0; chain < m; ++chain) {
      double p1 = chain_p0[static_cast<std::size_t>(chain)][i];
      conf += bit ? p1 : (1.0 - p1);
    }
    out.bit_confidence[i] = conf / static_cast<double>(m);
  }
  out.shot_confidence = *std::min_element(out.bit_confidence.begin(), out.bit_confidence.end());
  return out;
}

}  // namespace diffqec
