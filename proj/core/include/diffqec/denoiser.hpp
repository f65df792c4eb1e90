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

#ifndef DIFFQEC_DENOISER_HPP
#define DIFFQEC_DENOISER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "diffqec/bit_vector.hpp"
#include "diffqec/rng.hpp"
#include "diffqec/schedule.hpp"
#include "diffqec/tape.hpp"
#include "diffqec/tensor.hpp"

namespace diffqec {

/// Topology of the conditional denoiser. The architecture is fixed
/// (shared per-round convolutions + GRU syndrome processor, additive input
/// encoding, gated feature-modulated residual layers); everything here is a
/// size knob.
struct DenoiserConfig {
  int distance = 3;
  int label_bits = 1;   // L
  int horizon = 32;     // T, diffusion steps
  int hidden = 128;     // H
  int layers = 4;       // K denoising layers
  int conv1_channels = 16;
  int conv2_channels = 32;
  int time_embed_dim = 64;
  int chains = 4;  // default reverse chains per decode
  double schedule_offset = kDefaultScheduleOffset;

  int grid_size() const { return distance + 1; }
  int feature_dim() const { return conv2_channels; }
  void validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

/// All trainable weights, in a fixed order (the order is part of the
/// checkpoint format).
class DenoiserParams {
 public:
  struct LayerIndices {
    int w1, b1, w2, b2;
    int w_scale, b_scale;  // controller: c -> gamma
    int w_shift, b_shift;  // controller: c -> beta
    int w_gate, b_gate;    // gate pre-activation
  };

  DenoiserConfig config;
  std::vector<Parameter> params;

  int conv1_w, conv1_b, conv2_w, conv2_b;
  int gru_wz, gru_uz, gru_bz;
  int gru_wr, gru_ur, gru_br;
  int gru_wn, gru_un, gru_bn;
  int time_fc1_w, time_fc1_b, time_fc2_w, time_fc2_b;
  int xenc_w, xenc_b;
  std::vector<LayerIndices> layer;
  int head_w, head_b;

  /// Scaled-uniform fan-in init; scale biases start at 1 and gate biases at
  /// -2 so the residual stack is near-identity at the start of training.
  static DenoiserParams init(const DenoiserConfig& config, Rng& rng);

  const Parameter& at(int idx) const { return params[static_cast<std::size_t>(idx)]; }
  Parameter& at(int idx) { return params[static_cast<std::size_t>(idx)]; }
  std::size_t total_weights() const;
};

/// Sinusoidal embedding of an integer timestep (half sines, half cosines,
/// geometric frequency ladder).
std::vector<double> time_embedding(int t, int dim);

// ---- Tape builders. All take entry ids and return entry ids. ----

/// Shared per-round conv stack + global average pooling.
/// grid: [rows, 2, G, G] -> [rows, F]. Rows may batch rounds and shots.
int encode_rounds(Tape& tape, int grid, const DenoiserParams& p);

/// GRU over rounds in chronological order. feats: [r*n, F], round-major
/// (round k occupies rows [k*n, (k+1)*n)). Returns the final hidden state
/// c: [n, H].
int aggregate_temporal(Tape& tape, int feats, int n, int rounds, const DenoiserParams& p);

/// h0 = x-encoder(x_t) + time-encoder(t_emb) + c. x_t: [n, L],
/// t_emb: [n, time_embed_dim], c: [n, H] -> [n, H].
int encode_inputs(Tape& tape, int x_t, int t_emb, int c, const DenoiserParams& p);

/// One syndrome-feature-modulated residual layer:
/// u = relu(W1 h + b1); m = gamma(c) * u + beta(c); body = W2 m + b2;
/// g = sigmoid(Wg c + bg); h' = h + g * body.
int denoise_layer(Tape& tape, int h, int c, const DenoiserParams& p, int layer_index);

/// The K-layer stack followed by the output head -> logits [n, 2L].
int denoise_trunk(Tape& tape, int h0, int c, const DenoiserParams& p);

/// Full forward pass for a batch sharing one round count.
/// grid: [r*n, 2, G, G] round-major. Returns logits [n, 2L].
int denoiser_forward_on_tape(Tape& tape, int grid, int x_t, int t_emb, int n, int rounds,
                             const DenoiserParams& p);

/// Convenience single-shot forward. Returns logits (length 2L) and p0
/// (length L, P(bit = 1) per bit).
struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> p0;
};
ForwardResult denoiser_forward(const DenoiserParams& p, std::span<const std::uint8_t> grid,
                               int rounds, const BitVector& x_t, int t);

/// One training batch item; grid points at rounds*2*G*G bytes.
struct BatchItem {
  const std::uint8_t* grid;
  const BitVector* label;
};

/// Bitwise cross-entropy diffusion loss on one batch (single round count).
/// Per sample draws t ~ U{1..T} and x_t ~ forward_sample(label, t) from
/// `rng`, then averages the two-class CE over bits and batch. Gradients are
/// accumulated into `grad_sink` (indexed like params). Returns the loss.
double training_loss(const DenoiserParams& p, const NoiseSchedule& schedule,
                     std::span<const BatchItem> batch, int rounds, Rng& rng,
                     std::vector<std::vector<double>>& grad_sink);

/// Loss only (no gradient); used by finite-difference checks.
double training_loss_value(const DenoiserParams& p, const NoiseSchedule& schedule,
                           std::span<const BatchItem> batch, int rounds,
                           std::span<const int> fixed_t,
                           const std::vector<BitVector>& fixed_x_t);

/// As training_loss but with the stochastic choices (t, x_t) pinned, so the
/// loss is a deterministic function of the parameters.
double training_loss_fixed(const DenoiserParams& p, const NoiseSchedule& schedule,
                           std::span<const BatchItem> batch, int rounds,
                           std::span<const int> fixed_t, const std::vector<BitVector>& fixed_x_t,
                           std::vector<std::vector<double>>& grad_sink);

}  // namespace diffqec

#endif  // DIFFQEC_DENOISER_HPP
