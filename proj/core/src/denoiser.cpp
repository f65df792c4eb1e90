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

#include "diffqec/denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "diffqec/diffusion.hpp"

namespace diffqec {

void DenoiserConfig::validate() const {
  if (distance < 3 || distance % 2 == 0) throw std::invalid_argument("config: bad distance");
  if (label_bits != 1 && label_bits != 2) throw std::invalid_argument("config: label_bits must be 1 or 2");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (hidden < 1 || layers < 1 || conv1_channels < 1 || conv2_channels < 1) {
    throw std::invalid_argument("config: sizes must be positive");
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw std::invalid_argument("config: time_embed_dim must be even and >= 2");
  }
  if (chains < 1) throw std::invalid_argument("config: chains must be >= 1");
}

namespace {

void fill_uniform(Parameter& p, double bound, Rng& rng) {
  for (double& w : p.value) w = (2.0 * rng.uniform01() - 1.0) * bound;
}

}  // namespace

DenoiserParams DenoiserParams::init(const DenoiserConfig& config, Rng& rng) {
  config.validate();
  DenoiserParams dp;
  dp.config = config;
  const int h = config.hidden;
  const int f = config.feature_dim();
  const int l = config.label_bits;
  const int e = config.time_embed_dim;

  auto add = [&dp](const std::string& name, Shape shape) {
    dp.params.emplace_back(name, shape);
    return static_cast<int>(dp.params.size()) - 1;
  };
  auto add_weight = [&](const std::string& name, Shape shape, int fan_in, Rng& r) {
    int idx = add(name, shape);
    fill_uniform(dp.params[static_cast<std::size_t>(idx)], std::sqrt(1.0 / fan_in), r);
    return idx;
  };

  dp.conv1_w = add_weight("conv1.w", Shape{config.conv1_channels, 2, 3, 3}, 2 * 9, rng);
  dp.conv1_b = add("conv1.b", Shape{config.conv1_channels});
  dp.conv2_w = add_weight("conv2.w", Shape{config.conv2_channels, config.conv1_channels, 3, 3},
                          config.conv1_channels * 9, rng);
  dp.conv2_b = add("conv2.b", Shape{config.conv2_channels});

  dp.gru_wz = add_weight("gru.wz", Shape{h, f}, f, rng);
  dp.gru_uz = add_weight("gru.uz", Shape{h, h}, h, rng);
  dp.gru_bz = add("gru.bz", Shape{h});
  dp.gru_wr = add_weight("gru.wr", Shape{h, f}, f, rng);
  dp.gru_ur = add_weight("gru.ur", Shape{h, h}, h, rng);
  dp.gru_br = add("gru.br", Shape{h});
  dp.gru_wn = add_weight("gru.wn", Shape{h, f}, f, rng);
  dp.gru_un = add_weight("gru.un", Shape{h, h}, h, rng);
  dp.gru_bn = add("gru.bn", Shape{h});

  dp.time_fc1_w = add_weight("time.fc1.w", Shape{h, e}, e, rng);
  dp.time_fc1_b = add("time.fc1.b", Shape{h});
  dp.time_fc2_w = add_weight("time.fc2.w", Shape{h, h}, h, rng);
  dp.time_fc2_b = add("time.fc2.b", Shape{h});

  dp.xenc_w = add_weight("xenc.w", Shape{h, l}, l, rng);
  dp.xenc_b = add("xenc.b", Shape{h});

  for (int k = 0; k < config.layers; ++k) {
    const std::string prefix = "layer" + std::to_string(k) + ".";
    LayerIndices li{};
    li.w1 = add_weight(prefix + "w1", Shape{h, h}, h, rng);
    li.b1 = add(prefix + "b1", Shape{h});
    li.w2 = add_weight(prefix + "w2", Shape{h, h}, h, rng);
    li.b2 = add(prefix + "b2", Shape{h});
    li.w_scale = add_weight(prefix + "wscale", Shape{h, h}, h, rng);
    li.b_scale = add(prefix + "bscale", Shape{h});
    for (double& v : dp.params[static_cast<std::size_t>(li.b_scale)].value) v = 1.0;
    li.w_shift = add_weight(prefix + "wshift", Shape{h, h}, h, rng);
    li.b_shift = add(prefix + "bshift", Shape{h});
    li.w_gate = add_weight(prefix + "wgate", Shape{h, h}, h, rng);
    li.b_gate = add(prefix + "bgate", Shape{h});
    for (double& v : dp.params[static_cast<std::size_t>(li.b_gate)].value) v = -2.0;
    dp.layer.push_back(li);
  }

  dp.head_w = add_weight("head.w", Shape{2 * l, h}, h, rng);
  dp.head_b = add("head.b", Shape{2 * l});
  return dp;
}

std::size_t DenoiserParams::total_weights() const {
  std::size_t total = 0;
  for (const Parameter& p : params) total += p.size();
  return total;
}

std::vector<double> time_embedding(int t, int dim) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("time_embedding: dim must be even");
  std::vector<double> emb(static_cast<std::size_t>(dim));
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
    emb[static_cast<std::size_t>(2 * i)] = std::sin(t * freq);
    emb[static_cast<std::size_t>(2 * i) + 1] = std::cos(t * freq);
  }
  return emb;
}

int encode_rounds(Tape& tape, int grid, const DenoiserParams& p) {
  int c1 = tape.conv2d(grid, tape.param(p.at(p.conv1_w), p.conv1_w),
                       tape.param(p.at(p.conv1_b), p.conv1_b), /*pad=*/1);
  int a1 = tape.relu(c1);
  int c2 = tape.conv2d(a1, tape.param(p.at(p.conv2_w), p.conv2_w),
                       tape.param(p.at(p.conv2_b), p.conv2_b), /*pad=*/1);
  int a2 = tape.relu(c2);
  return tape.global_avg_pool(a2);
}

int aggregate_temporal(Tape& tape, int feats, int n, int rounds, const DenoiserParams& p) {
  if (rounds < 1) throw std::invalid_argument("aggregate_temporal: rounds must be >= 1");
  const int h_dim = p.config.hidden;
  int wz = tape.param(p.at(p.gru_wz), p.gru_wz), uz = tape.param(p.at(p.gru_uz), p.gru_uz),
      bz = tape.param(p.at(p.gru_bz), p.gru_bz);
  int wr = tape.param(p.at(p.gru_wr), p.gru_wr), ur = tape.param(p.at(p.gru_ur), p.gru_ur),
      br = tape.param(p.at(p.gru_br), p.gru_br);
  int wn = tape.param(p.at(p.gru_wn), p.gru_wn), un = tape.param(p.at(p.gru_un), p.gru_un),
      bn = tape.param(p.at(p.gru_bn), p.gru_bn);

  int h = tape.zeros(Shape{n, h_dim});
  for (int k = 0; k < rounds; ++k) {
    int x = tape.slice_rows(feats, k * n, n);
    int z = tape.sigmoid(tape.add(tape.linear(x, wz, bz), tape.linear(h, uz)));
    int r = tape.sigmoid(tape.add(tape.linear(x, wr, br), tape.linear(h, ur)));
    int cand = tape.tanh_op(tape.add(tape.linear(x, wn, bn), tape.linear(tape.mul(r, h), un)));
    int keep = tape.mul(z, h);
    int update = tape.mul(tape.scale_add(z, -1.0, 1.0), cand);
    h = tape.add(keep, update);
  }
  return h;
}

int encode_inputs(Tape& tape, int x_t, int t_emb, int c, const DenoiserParams& p) {
  int e_x = tape.linear(x_t, tape.param(p.at(p.xenc_w), p.xenc_w),
                        tape.param(p.at(p.xenc_b), p.xenc_b));
  int mid = tape.relu(tape.linear(t_emb, tape.param(p.at(p.time_fc1_w), p.time_fc1_w),
                                  tape.param(p.at(p.time_fc1_b), p.time_fc1_b)));
  int e_t = tape.linear(mid, tape.param(p.at(p.time_fc2_w), p.time_fc2_w),
                        tape.param(p.at(p.time_fc2_b), p.time_fc2_b));
  return tape.add(tape.add(e_x, e_t), c);
}

int denoise_layer(Tape& tape, int h, int c, const DenoiserParams& p, int layer_index) {
  const auto& li = p.layer[static_cast<std::size_t>(layer_index)];
  int u = tape.relu(tape.linear(h, tape.param(p.at(li.w1), li.w1), tape.param(p.at(li.b1), li.b1)));
  int gamma = tape.linear(c, tape.param(p.at(li.w_scale), li.w_scale),
                          tape.param(p.at(li.b_scale), li.b_scale));
  int beta = tape.linear(c, tape.param(p.at(li.w_shift), li.w_shift),
                         tape.param(p.at(li.b_shift), li.b_shift));
  int m = tape.add(tape.mul(gamma, u), beta);
  int body = tape.linear(m, tape.param(p.at(li.w2), li.w2), tape.param(p.at(li.b2), li.b2));
  int gate = tape.sigmoid(tape.linear(c, tape.param(p.at(li.w_gate), li.w_gate),
                                      tape.param(p.at(li.b_gate), li.b_gate)));
  return tape.add(h, tape.mul(gate, body));
}

int denoise_trunk(Tape& tape, int h0, int c, const DenoiserParams& p) {
  int h = h0;
  for (int k = 0; k < p.config.layers; ++k) h = denoise_layer(tape, h, c, p, k);
  return tape.linear(h, tape.param(p.at(p.head_w), p.head_w), tape.param(p.at(p.head_b), p.head_b));
}

int denoiser_forward_on_tape(Tape& tape, int grid, int x_t, int t_emb, int n, int rounds,
                             const DenoiserParams& p) {
  int feats = encode_rounds(tape, grid, p);
  int c = aggregate_temporal(tape, feats, n, rounds, p);
  int h0 = encode_inputs(tape, x_t, t_emb, c, p);
  return denoise_trunk(tape, h0, c, p);
}

ForwardResult denoiser_forward(const DenoiserParams& p, std::span<const std::uint8_t> grid,
                               int rounds, const BitVector& x_t, int t) {
  const int g = p.config.grid_size();
  const std::size_t expected = static_cast<std::size_t>(rounds) * 2 * static_cast<std::size_t>(g) *
                               static_cast<std::size_t>(g);
  if (grid.size() != expected) throw std::invalid_argument("denoiser_forward: grid size mismatch");
  if (x_t.size() != static_cast<std::size_t>(p.config.label_bits)) {
    throw std::invalid_argument("denoiser_forward: x_t length mismatch");
  }
  if (t < 0 || t > p.config.horizon) throw std::invalid_argument("denoiser_forward: t out of range");

  Tape tape;
  Tensor grid_t(Shape{rounds, 2, g, g});
  for (std::size_t i = 0; i < grid.size(); ++i) grid_t.v[i] = static_cast<double>(grid[i]);
  int grid_id = tape.leaf(std::move(grid_t));

  Tensor xt_t(Shape{1, p.config.label_bits});
  for (std::size_t i = 0; i < x_t.size(); ++i) xt_t.v[i] = static_cast<double>(x_t.bit(i));
  int xt_id = tape.leaf(std::move(xt_t));

  Tensor temb_t(Shape{1, p.config.time_embed_dim});
  temb_t.v = time_embedding(t, p.config.time_embed_dim);
  int temb_id = tape.leaf(std::move(temb_t));

  int logits_id = denoiser_forward_on_tape(tape, grid_id, xt_id, temb_id, /*n=*/1, rounds, p);
  ForwardResult result;
  result.logits = tape.value(logits_id).v;
  result.p0 = softmax_pair_one(result.logits);
  return result;
}

namespace {

double loss_on_batch(const DenoiserParams& p, std::span<const BatchItem> batch, int rounds,
                     std::span<const int> ts, const std::vector<BitVector>& xts,
                     std::vector<std::vector<double>>* grad_sink) {
  p.config.validate();
  if (batch.empty()) throw std::invalid_argument("training loss: empty batch");
  const int n = static_cast<int>(batch.size());
  const int g = p.config.grid_size();
  const int l = p.config.label_bits;
  const int e = p.config.time_embed_dim;
  const std::size_t grid_cells =
      2 * static_cast<std::size_t>(g) * static_cast<std::size_t>(g);

  Tape tape;
  // Round-major batch layout: round k occupies rows [k*n, (k+1)*n).
  Tensor grid_t(Shape{rounds * n, 2, g, g});
  for (int i = 0; i < n; ++i) {
    const std::uint8_t* src = batch[static_cast<std::size_t>(i)].grid;
    for (int k = 0; k < rounds; ++k) {
      double* dst = grid_t.v.data() +
                    (static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(i)) *
                        grid_cells;
      const std::uint8_t* src_round = src + static_cast<std::size_t>(k) * grid_cells;
      for (std::size_t j = 0; j < grid_cells; ++j) dst[j] = static_cast<double>(src_round[j]);
    }
  }
  int grid_id = tape.leaf(std::move(grid_t));

  Tensor xt_t(Shape{n, l});
  Tensor temb_t(Shape{n, e});
  std::vector<std::uint8_t> targets(static_cast<std::size_t>(n) * static_cast<std::size_t>(l));
  for (int i = 0; i < n; ++i) {
    const BitVector& x_t = xts[static_cast<std::size_t>(i)];
    for (int j = 0; j < l; ++j) {
      xt_t.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(l) + static_cast<std::size_t>(j)] =
          static_cast<double>(x_t.bit(static_cast<std::size_t>(j)));
      targets[static_cast<std::size_t>(i) * static_cast<std::size_t>(l) + static_cast<std::size_t>(j)] =
          batch[static_cast<std::size_t>(i)].label->bit(static_cast<std::size_t>(j));
    }
    std::vector<double> emb = time_embedding(ts[static_cast<std::size_t>(i)], e);
    std::copy(emb.begin(), emb.end(),
              temb_t.v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) *
                                                             static_cast<std::size_t>(e)));
  }
  int xt_id = tape.leaf(std::move(xt_t));
  int temb_id = tape.leaf(std::move(temb_t));

  int logits_id = denoiser_forward_on_tape(tape, grid_id, xt_id, temb_id, n, rounds, p);
  int loss_id = tape.softmax_xent_mean(logits_id, std::move(targets), l);
  double loss = tape.value(loss_id).v[0];
  if (grad_sink != nullptr) {
    tape.backward(loss_id);
    tape.export_param_grads(*grad_sink);
  }
  return loss;
}

}  // namespace

double training_loss(const DenoiserParams& p, const NoiseSchedule& schedule,
                     std::span<const BatchItem> batch, int rounds, Rng& rng,
                     std::vector<std::vector<double>>& grad_sink) {
  if (batch.empty()) throw std::invalid_argument("training_loss: empty batch");
  std::vector<int> ts(batch.size());
  std::vector<BitVector> xts(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ts[i] = static_cast<int>(rng.uniform_int(1, schedule.horizon));
    xts[i] = forward_sample(*batch[i].label, ts[i], schedule, rng);
  }
  return loss_on_batch(p, batch, rounds, ts, xts, &grad_sink);
}

double training_loss_value(const DenoiserParams& p, const NoiseSchedule& schedule,
                           std::span<const BatchItem> batch, int rounds,
                           std::span<const int> fixed_t,
                           const std::vector<BitVector>& fixed_x_t) {
  (void)schedule;
  return loss_on_batch(p, batch, rounds, fixed_t, fixed_x_t, nullptr);
}

double training_loss_fixed(const DenoiserParams& p, const NoiseSchedule& schedule,
                           std::span<const BatchItem> batch, int rounds,
                           std::span<const int> fixed_t, const std::vector<BitVector>& fixed_x_t,
                           std::vector<std::vector<double>>& grad_sink) {
  (void)schedule;
  return loss_on_batch(p, batch, rounds, fixed_t, fixed_x_t, &grad_sink);
}

}  // namespace diffqec
