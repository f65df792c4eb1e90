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

#ifndef DIFFQEC_NOISE_SIM_HPP
#define DIFFQEC_NOISE_SIM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diffqec/bit_vector.hpp"
#include "diffqec/rng.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

enum class NoiseKind {
  code_capacity_depolarizing,  // data errors only, perfect measurements
  phenomenological,            // adds independent syndrome-bit flips
};

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseModel {
  NoiseKind kind = NoiseKind::code_capacity_depolarizing;
  double p_phys = 0.0;  // per-qubit per-round Pauli error probability
  double p_meas = 0.0;  // per-measurement flip probability

  static NoiseModel code_capacity(double p_phys);
  static NoiseModel phenomenological(double p_phys, double p_meas);

  /// Throws std::invalid_argument if probabilities leave [0,1] or a
  /// code-capacity model carries measurement noise.
  void validate() const;
};

/// Detection-event history of one shot, embedded as a spatial grid.
///
/// grid has shape rounds x 2 x (d+1) x (d+1); channel 0 carries X-stabilizer
/// detection events, channel 1 Z-stabilizer events. Cells hosting no
/// stabilizer are always zero. Round 0 events equal the raw round-0
/// syndrome; later rounds are the XOR of consecutive raw syndromes.
struct SyndromeHistory {
  int rounds = 0;
  int grid_size = 0;  // d + 1
  std::vector<std::uint8_t> grid;
  std::vector<BitVector> raw_x;  // raw syndromes per round (may be empty for
  std::vector<BitVector> raw_z;  // histories loaded from disk)

  std::size_t grid_index(int round, int channel, int row, int col) const {
    return ((static_cast<std::size_t>(round) * 2 + static_cast<std::size_t>(channel)) *
                static_cast<std::size_t>(grid_size) +
            static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(grid_size) +
           static_cast<std::size_t>(col);
  }
  std::uint8_t grid_at(int round, int channel, int row, int col) const {
    return grid[grid_index(round, channel, row, col)];
  }

  /// Detection event of stabilizer `index` of the given type at `round`,
  /// read back out of the grid.
  std::uint8_t event(const SurfaceCode& code, bool z_type, std::size_t index, int round) const;
};

struct ShotMeta {
  int distance = 0;
  int rounds = 0;
  NoiseModel noise;
  std::uint64_t seed = 0;
};

struct Sample {
  SyndromeHistory history;
  BitVector label;
  std::optional<std::pair<BitVector, BitVector>> true_error;  // (x_err, z_err); analysis only
  ShotMeta meta;
};

/// Depolarizing draw: each data qubit independently suffers X, Y, or Z with
/// probability p_phys/3 each; Y sets both the X and Z bit.
std::pair<BitVector, BitVector> sample_error(const SurfaceCode& code, const NoiseModel& noise,
                                             Rng& rng);

/// Embed per-round detection events into the rounds x 2 x (d+1) x (d+1)
/// grid. x_events/z_events hold one BitVector per round, with lengths
/// matching the respective stabilizer counts.
std::vector<std::uint8_t> embed_syndrome_grid(const SurfaceCode& code,
                                              const std::vector<BitVector>& x_events,
                                              const std::vector<BitVector>& z_events);

/// One memory-experiment shot over `rounds` stabilizer rounds.
///
/// Fresh data errors accumulate before every round. Rounds 0..r-2 are
/// measured with per-bit flip probability p_meas; the final round is the
/// perfect terminal readout, so its raw syndrome always equals
/// syndrome_of(accumulated error). The label is the logical effect of the
/// accumulated error.
Sample run_memory_experiment(const SurfaceCode& code, const NoiseModel& noise, int rounds, Rng& rng,
                             int num_label_bits = 1, bool keep_true_error = true);

}  // namespace diffqec

#endif  // DIFFQEC_NOISE_SIM_HPP
