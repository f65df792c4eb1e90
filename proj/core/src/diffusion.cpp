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

#include "diffqec/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace diffqec {

BitVector forward_sample(const BitVector& x0, int t, const NoiseSchedule& schedule, Rng& rng) {
  if (t < 1 || t > schedule.horizon) throw std::invalid_argument("forward_sample: t out of range");
  const double flip_p = (1.0 - schedule.bar_alpha(t)) / 2.0;
  BitVector x_t = x0;
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    if (rng.bernoulli(flip_p)) x_t.flip(i);
  }
  return x_t;
}

std::array<double, 2> posterior_bit(int x_t_bit, int x0_bit, int t, const NoiseSchedule& schedule) {
  if (t < 2 || t > schedule.horizon) throw std::invalid_argument("posterior_bit: t out of range");
  if ((x_t_bit | x0_bit) > 1 || x_t_bit < 0 || x0_bit < 0) {
    throw std::invalid_argument("posterior_bit: bits must be 0 or 1");
  }
  const double beta = schedule.beta(t);
  const double prev_bar = schedule.bar_alpha(t - 1);
  const double q_same = 1.0 - beta / 2.0;   // Q_t[v -> x_t] when v == x_t
  const double q_diff = beta / 2.0;
  const double c_same = (1.0 + prev_bar) / 2.0;  // Qbar_{t-1}[x0 -> v] when v == x0
  const double c_diff = (1.0 - prev_bar) / 2.0;

  std::array<double, 2> unnorm{};
  for (int v = 0; v < 2; ++v) {
    double lik = (v == x_t_bit) ? q_same : q_diff;
    double prior = (v == x0_bit) ? c_same : c_diff;
    unnorm[static_cast<std::size_t>(v)] = lik * prior;
  }
  double z = unnorm[0] + unnorm[1];
  return {unnorm[0] / z, unnorm[1] / z};
}

BitVector reverse_step(const BitVector& x_t, int t, std::span<const double> p0_one,
                       const NoiseSchedule& schedule, Rng& rng) {
  if (t < 2 || t > schedule.horizon) throw std::invalid_argument("reverse_step: t out of range");
  if (p0_one.size() != x_t.size()) throw std::invalid_argument("reverse_step: p0 length mismatch");
  BitVector out(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    double p1 = p0_one[i];
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("reverse_step: p0 not a probability");
    auto post0 = posterior_bit(x_t.bit(i), 0, t, schedule);
    auto post1 = posterior_bit(x_t.bit(i), 1, t, schedule);
    double prob_one = (1.0 - p1) * post0[1] + p1 * post1[1];
    out.set(i, rng.bernoulli(prob_one) ? 1 : 0);
  }
  return out;
}

BitVector sample_prior(std::size_t length, Rng& rng) {
  BitVector x(length);
  for (std::size_t i = 0; i < length; ++i) x.set(i, rng.bernoulli(0.5) ? 1 : 0);
  return x;
}

BitVector finalize(std::span<const double> logits) {
  if (logits.size() % 2 != 0) throw std::invalid_argument("finalize: logits must come in pairs");
  BitVector out(logits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double l0 = logits[2 * i], l1 = logits[2 * i + 1];
    if (!std::isfinite(l0) || !std::isfinite(l1)) {
      throw std::invalid_argument("finalize: non-finite logit");
    }
    out.set(i, l1 > l0 ? 1 : 0);
  }
  return out;
}

std::vector<double> softmax_pair_one(std::span<const double> logits) {
  if (logits.size() % 2 != 0) throw std::invalid_argument("softmax_pair_one: logits must come in pairs");
  std::vector<double> p(logits.size() / 2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double l0 = logits[2 * i], l1 = logits[2 * i + 1];
    double m = std::max(l0, l1);
    double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
    p[i] = e1 / (e0 + e1);
  }
  return p;
}

}  // namespace diffqec
