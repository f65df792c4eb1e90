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

#include "diffqec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "diffqec/tape.hpp"

namespace diffqec {

std::pair<double, double> wilson_interval(std::size_t errors, std::size_t n) {
  if (n == 0) throw std::invalid_argument("wilson_interval: empty sample");
  const double z = 1.959963984540054;  // 97.5th percentile of the normal
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(errors) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Metrics compute_metrics(std::span<const BitVector> predictions, std::span<const BitVector> labels,
                        std::span<const double> latencies_us) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw std::invalid_argument("compute_metrics: need equal, non-empty prediction/label lists");
  }
  Metrics m;
  m.n_shots = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != labels[i].size()) {
      throw std::invalid_argument("compute_metrics: prediction/label length mismatch");
    }
    if (predictions[i] != labels[i]) ++m.n_errors;
  }
  m.ler = static_cast<double>(m.n_errors) / static_cast<double>(m.n_shots);
  auto [lo, hi] = wilson_interval(m.n_errors, m.n_shots);
  m.wilson_lo = lo;
  m.wilson_hi = hi;
  m.fidelity_proxy = 1.0 - 2.0 * m.ler;
  if (!latencies_us.empty()) {
    if (latencies_us.size() != predictions.size()) {
      throw std::invalid_argument("compute_metrics: latency list length mismatch");
    }
    m.mean_latency_us = std::accumulate(latencies_us.begin(), latencies_us.end(), 0.0) /
                        static_cast<double>(latencies_us.size());
  }
  return m;
}

EvalReport logical_error_rate(std::span<const BitVector> predictions,
                              std::span<const BitVector> labels) {
  EvalReport report;
  static_cast<Metrics&>(report) = compute_metrics(predictions, labels);
  return report;
}

PostselectReport postselect(std::span<const BitVector> predictions,
                            std::span<const BitVector> labels,
                            std::span<const double> confidences, double rho) {
  if (!(rho >= 0.0 && rho <= 0.99)) throw std::invalid_argument("postselect: rho must be in [0, 0.99]");
  if (confidences.size() != predictions.size()) {
    throw std::invalid_argument("postselect: confidence list length mismatch");
  }
  for (double c : confidences) {
    if (!std::isfinite(c)) throw std::invalid_argument("postselect: non-finite confidence");
  }
  const std::size_t n = predictions.size();
  const std::size_t discard = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });

  std::vector<BitVector> kept_preds, kept_labels;
  kept_preds.reserve(n - discard);
  kept_labels.reserve(n - discard);
  std::vector<bool> dropped(n, false);
  for (std::size_t i = 0; i < discard; ++i) dropped[order[i]] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (dropped[i]) continue;
    kept_preds.push_back(predictions[i]);
    kept_labels.push_back(labels[i]);
  }

  PostselectReport report;
  report.rho = rho;
  report.retained = kept_preds.size();
  report.retained_fraction = static_cast<double>(report.retained) / static_cast<double>(n);
  report.metrics = compute_metrics(kept_preds, kept_labels);
  return report;
}

namespace {

// Forward pass on a real-valued grid; returns (margin value, optional grid
// gradient) for the fixed chosen classes.
double margin_forward(const DenoiserParams& params, std::span<const double> grid_values, int rounds,
                      int grid_size, const std::vector<std::uint8_t>& chosen,
                      std::vector<double>* grad_out) {
  Tape tape;
  Tensor grid_t(Shape{rounds, 2, grid_size, grid_size});
  std::copy(grid_values.begin(), grid_values.end(), grid_t.v.begin());
  int grid_id = tape.leaf(std::move(grid_t), /*requires_grad=*/grad_out != nullptr);

  const int l = params.config.label_bits;
  int xt_id = tape.zeros(Shape{1, l});
  Tensor temb_t(Shape{1, params.config.time_embed_dim});
  temb_t.v = time_embedding(1, params.config.time_embed_dim);
  int temb_id = tape.leaf(std::move(temb_t));

  int logits = denoiser_forward_on_tape(tape, grid_id, xt_id, temb_id, /*n=*/1, rounds, params);
  int margin = tape.margin_sum(logits, chosen);
  double value = tape.value(margin).v[0];
  if (grad_out != nullptr) {
    tape.backward(margin);
    *grad_out = tape.grad(grid_id);
  }
  return value;
}

}  // namespace

IgResult integrated_gradients(const DenoiserParams& params, const SurfaceCode& code, GridView grid,
                              const std::vector<double>* baseline, int m_steps) {
  if (m_steps < 8) throw std::invalid_argument("integrated_gradients: m_steps must be >= 8");
  if (grid.grid_size != params.config.grid_size() || grid.rounds < 1) {
    throw std::invalid_argument("integrated_gradients: grid does not match denoiser config");
  }
  const std::size_t cells = grid.numel();
  std::vector<double> input(cells);
  for (std::size_t i = 0; i < cells; ++i) input[i] = static_cast<double>(grid.data[i]);
  std::vector<double> base(cells, 0.0);
  if (baseline != nullptr) {
    if (baseline->size() != cells) throw std::invalid_argument("integrated_gradients: baseline size mismatch");
    base = *baseline;
  }

  // Predicted class at the actual input fixes the margin target.
  const int l = params.config.label_bits;
  std::vector<std::uint8_t> chosen(static_cast<std::size_t>(l), 0);
  {
    Tape tape;
    Tensor grid_t(Shape{grid.rounds, 2, grid.grid_size, grid.grid_size});
    std::copy(input.begin(), input.end(), grid_t.v.begin());
    int grid_id = tape.leaf(std::move(grid_t));
    int xt_id = tape.zeros(Shape{1, l});
    Tensor temb_t(Shape{1, params.config.time_embed_dim});
    temb_t.v = time_embedding(1, params.config.time_embed_dim);
    int temb_id = tape.leaf(std::move(temb_t));
    int logits = denoiser_forward_on_tape(tape, grid_id, xt_id, temb_id, 1, grid.rounds, params);
    const auto& lv = tape.value(logits).v;
    for (int j = 0; j < l; ++j) {
      chosen[static_cast<std::size_t>(j)] =
          lv[static_cast<std::size_t>(2 * j) + 1] > lv[static_cast<std::size_t>(2 * j)] ? 1 : 0;
    }
  }

  IgResult result;
  result.f_input = margin_forward(params, input, grid.rounds, grid.grid_size, chosen, nullptr);
  result.f_baseline = margin_forward(params, base, grid.rounds, grid.grid_size, chosen, nullptr);

  std::vector<double> avg_grad(cells, 0.0);
  std::vector<double> point(cells), grad;
  for (int k = 1; k <= m_steps; ++k) {
    const double alpha = (static_cast<double>(k) - 0.5) / static_cast<double>(m_steps);
    for (std::size_t i = 0; i < cells; ++i) point[i] = base[i] + alpha * (input[i] - base[i]);
    margin_forward(params, point, grid.rounds, grid.grid_size, chosen, &grad);
    for (std::size_t i = 0; i < cells; ++i) avg_grad[i] += grad[i];
  }

  result.grid_attribution.assign(cells, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    result.grid_attribution[i] = (input[i] - base[i]) * avg_grad[i] / static_cast<double>(m_steps);
    total += result.grid_attribution[i];
  }
  result.completeness_residual = std::abs(total - (result.f_input - result.f_baseline));

  // Per-detector view: rounds x (X stabilizers, then Z stabilizers).
  const std::size_t stabs_per_round = code.num_stabilizers();
  result.per_detector.assign(static_cast<std::size_t>(grid.rounds) * stabs_per_round, 0.0);
  const std::size_t plane = static_cast<std::size_t>(grid.grid_size) * static_cast<std::size_t>(grid.grid_size);
  for (int round = 0; round < grid.rounds; ++round) {
    std::size_t det = static_cast<std::size_t>(round) * stabs_per_round;
    for (const auto& s : code.x_stabilizers) {
      std::size_t idx = (static_cast<std::size_t>(round) * 2 + 0) * plane +
                        static_cast<std::size_t>(s.cell_row) * static_cast<std::size_t>(grid.grid_size) +
                        static_cast<std::size_t>(s.cell_col);
      result.per_detector[det++] = result.grid_attribution[idx];
    }
    for (const auto& s : code.z_stabilizers) {
      std::size_t idx = (static_cast<std::size_t>(round) * 2 + 1) * plane +
                        static_cast<std::size_t>(s.cell_row) * static_cast<std::size_t>(grid.grid_size) +
                        static_cast<std::size_t>(s.cell_col);
      result.per_detector[det++] = result.grid_attribution[idx];
    }
  }
  return result;
}

std::vector<double> map_attributions_to_qubits(std::span<const double> per_detector,
                                               const SurfaceCode& code, int rounds) {
  const std::size_t stabs_per_round = code.num_stabilizers();
  if (per_detector.size() != static_cast<std::size_t>(rounds) * stabs_per_round) {
    throw std::invalid_argument("map_attributions_to_qubits: attribution length mismatch");
  }
  std::vector<double> scores(static_cast<std::size_t>(code.n_data), 0.0);
  for (int round = 0; round < rounds; ++round) {
    std::size_t det = static_cast<std::size_t>(round) * stabs_per_round;
    for (const auto& s : code.x_stabilizers) {
      double a = std::abs(per_detector[det++]);
      for (int q : s.support) scores[static_cast<std::size_t>(q)] += a;
    }
    for (const auto& s : code.z_stabilizers) {
      double a = std::abs(per_detector[det++]);
      for (int q : s.support) scores[static_cast<std::size_t>(q)] += a;
    }
  }
  double peak = *std::max_element(scores.begin(), scores.end());
  if (peak > 0.0) {
    for (double& v : scores) v /= peak;
  }
  return scores;
}

}  // namespace diffqec
