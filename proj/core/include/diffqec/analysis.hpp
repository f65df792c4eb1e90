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

#ifndef DIFFQEC_ANALYSIS_HPP
#define DIFFQEC_ANALYSIS_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "diffqec/bit_vector.hpp"
#include "diffqec/decode.hpp"
#include "diffqec/denoiser.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

struct Metrics {
  std::size_t n_shots = 0;
  std::size_t n_errors = 0;
  double ler = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double fidelity_proxy = 1.0;  // 1 - 2 * LER
  double mean_latency_us = 0.0;
};

struct EvalReport : Metrics {
  std::map<std::string, Metrics> per_decoder;
};

/// Wilson 95% score interval for `errors` failures in `n` trials.
std::pair<double, double> wilson_interval(std::size_t errors, std::size_t n);

/// Any-bit mismatch counts as one logical error.
Metrics compute_metrics(std::span<const BitVector> predictions, std::span<const BitVector> labels,
                        std::span<const double> latencies_us = {});

EvalReport logical_error_rate(std::span<const BitVector> predictions,
                              std::span<const BitVector> labels);

struct PostselectReport {
  Metrics metrics;
  double rho = 0.0;
  std::size_t retained = 0;
  double retained_fraction = 1.0;
};

/// Drops the floor(rho * n) least-confident shots (ties broken by stable
/// input order) and evaluates the remainder. rho must lie in [0, 0.99].
PostselectReport postselect(std::span<const BitVector> predictions,
                            std::span<const BitVector> labels,
                            std::span<const double> confidences, double rho);

struct IgResult {
  std::vector<double> per_detector;  // rounds x (X stabs then Z stabs)
  std::vector<double> grid_attribution;  // rounds*2*G*G, zero off-detector
  double f_input = 0.0;
  double f_baseline = 0.0;
  double completeness_residual = 0.0;  // |sum(IG) - (f(s) - f(b))|
};

/// Integrated gradients of the label-class logit margin.
///
/// Target: f(grid) = sum over bits of (logit[pred] - logit[other]) from a
/// single forward pass at t = 1 with x_t = 0, the predicted class taken at
/// the actual input. Grid entries are relaxed to reals along the straight
/// path from the baseline (all-zeros unless given); the path integral uses
/// midpoint sampling with m_steps >= 8 points.
IgResult integrated_gradients(const DenoiserParams& params, const SurfaceCode& code, GridView grid,
                              const std::vector<double>* baseline, int m_steps);

/// score_j = sum over detectors i of H[i, j] * |a_i|, accumulated over both
/// stabilizer types and all rounds, then max-normalized into [0, 1].
std::vector<double> map_attributions_to_qubits(std::span<const double> per_detector,
                                               const SurfaceCode& code, int rounds);

}  // namespace diffqec

#endif  // DIFFQEC_ANALYSIS_HPP
