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

#ifndef DIFFQEC_SCHEDULE_HPP
#define DIFFQEC_SCHEDULE_HPP

#include <array>
#include <string>
#include <vector>

namespace diffqec {

inline constexpr double kBetaFloor = 1e-4;
inline constexpr double kBetaCap = 0.9999;
inline constexpr double kDefaultScheduleOffset = 0.008;

/// Binary-corruption noise schedule over T diffusion steps.
///
/// `betas[t]` (1-indexed; betas[0] is unused and zero) is the per-step flip
/// strength; `bar_alphas[t]` is the cumulative retention coefficient,
/// recomputed as the exact running product of (1 - beta_u) after the betas
/// are clipped, so the closed-form kernel identities hold to rounding.
struct NoiseSchedule {
  int horizon = 0;  // T
  double offset = kDefaultScheduleOffset;
  std::vector<double> betas;       // size T+1, index 1..T
  std::vector<double> bar_alphas;  // size T+1, index 0..T, bar_alphas[0] == 1

  double beta(int t) const { return betas[static_cast<std::size_t>(t)]; }
  double bar_alpha(int t) const { return bar_alphas[static_cast<std::size_t>(t)]; }
};

/// Cosine schedule: bar_alpha_t = cos^2(((t/T + s)/(1 + s)) * pi/2),
/// normalized by the t = 0 value, with beta_t = 1 - bar_alpha_t /
/// bar_alpha_{t-1} clipped to [1e-4, 0.9999].
NoiseSchedule cosine_schedule(int horizon, double offset = kDefaultScheduleOffset);

/// 2x2 symmetric row-stochastic transition matrix; m[from][to].
struct BinaryKernel {
  std::array<std::array<double, 2>, 2> m{};
  double at(int from, int to) const { return m[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)]; }
};

/// One-step kernel Q_t = [[1 - beta/2, beta/2], [beta/2, 1 - beta/2]].
/// Requires 1 <= t <= T.
BinaryKernel kernel_at(const NoiseSchedule& schedule, int t);

/// Cumulative kernel Q_1 Q_2 ... Q_t, computed as an explicit matrix
/// product (t = 0 gives the identity). The closed form
/// [[(1+a)/2, (1-a)/2], [(1-a)/2, (1+a)/2]] with a = bar_alpha_t is checked
/// against this product in the test suite rather than substituted for it.
BinaryKernel cumulative_kernel(const NoiseSchedule& schedule, int t);

/// Audit dump ("diffqec-sched-1"): JSON table of (t, beta_t, bar_alpha_t).
std::string schedule_to_text(const NoiseSchedule& schedule);

}  // namespace diffqec

#endif  // DIFFQEC_SCHEDULE_HPP
