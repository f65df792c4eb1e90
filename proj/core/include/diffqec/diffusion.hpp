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

#ifndef DIFFQEC_DIFFUSION_HPP
#define DIFFQEC_DIFFUSION_HPP

#include <array>
#include <span>

#include "diffqec/bit_vector.hpp"
#include "diffqec/rng.hpp"
#include "diffqec/schedule.hpp"

namespace diffqec {

/// Sample x_t ~ Qbar_t(. | x_0): each bit flips independently with
/// probability (1 - bar_alpha_t) / 2. Requires 1 <= t <= T.
BitVector forward_sample(const BitVector& x0, int t, const NoiseSchedule& schedule, Rng& rng);

/// Exact bitwise posterior q(x_{t-1} | x_t, x_0) of the binary forward
/// process: P(v) proportional to Q_t[v -> x_t] * Qbar_{t-1}[x_0 -> v].
/// Returns {P(0), P(1)}, normalized. Requires 2 <= t <= T.
std::array<double, 2> posterior_bit(int x_t_bit, int x0_bit, int t, const NoiseSchedule& schedule);

/// One reverse transition: mixes posterior_bit over x_0 in {0,1} weighted by
/// the predicted clean-state distribution (p0_one[i] = P(x0_i = 1)), then
/// samples each bit independently. Requires 2 <= t <= T.
BitVector reverse_step(const BitVector& x_t, int t, std::span<const double> p0_one,
                       const NoiseSchedule& schedule, Rng& rng);

/// x_T ~ Bernoulli(1/2)^L.
BitVector sample_prior(std::size_t length, Rng& rng);

/// Bitwise argmax over logit pairs laid out (bit0_class0, bit0_class1,
/// bit1_class0, ...). Ties resolve to class 0. Throws on non-finite logits.
BitVector finalize(std::span<const double> logits);

/// Per-bit softmax of logit pairs; returns P(bit = 1) per bit.
std::vector<double> softmax_pair_one(std::span<const double> logits);

}  // namespace diffqec

#endif  // DIFFQEC_DIFFUSION_HPP
