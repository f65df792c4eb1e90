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

#ifndef DIFFQEC_DECODE_HPP
#define DIFFQEC_DECODE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "diffqec/bit_vector.hpp"
#include "diffqec/denoiser.hpp"
#include "diffqec/rng.hpp"
#include "diffqec/schedule.hpp"

namespace diffqec {

/// Read-only view of a detection-event grid (rounds x 2 x G x G bytes).
struct GridView {
  const std::uint8_t* data = nullptr;
  int rounds = 0;
  int grid_size = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(rounds) * 2 * static_cast<std::size_t>(grid_size) *
           static_cast<std::size_t>(grid_size);
  }
};

struct DecodeOutcome {
  BitVector label;
  std::vector<double> bit_confidence;  // mean over chains of the final-step
                                       // probability of the chosen class
  double shot_confidence = 0.0;        // min over bits
};

/// Syndrome feature c for one shot (conv stack + GRU), reusable across
/// chains and timesteps.
std::vector<double> syndrome_feature(const DenoiserParams& params, GridView grid);

/// Full reverse-diffusion decode: `chains` independent chains from the
/// Bernoulli(1/2) prior, posterior-guided reverse steps down to t = 2, a
/// final bitwise argmax at t = 1, and a per-bit majority vote across chains
/// (ties to 0). chains = 0 uses the config default.
DecodeOutcome decode_shot(const DenoiserParams& params, const NoiseSchedule& schedule,
                          GridView grid, Rng& rng, int chains = 0);

}  // namespace diffqec

#endif  // DIFFQEC_DECODE_HPP
