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

#include "diffqec/noise_sim.hpp"

#include <stdexcept>

namespace diffqec {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::code_capacity_depolarizing:
      return "code_capacity_depolarizing";
    case NoiseKind::phenomenological:
      return "phenomenological";
  }
  throw std::logic_error("unreachable noise kind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "code_capacity_depolarizing") return NoiseKind::code_capacity_depolarizing;
  if (name == "phenomenological") return NoiseKind::phenomenological;
  throw std::invalid_argument("unknown noise kind: " + name);
}

NoiseModel NoiseModel::code_capacity(double p_phys) {
  NoiseModel m{NoiseKind::code_capacity_depolarizing, p_phys, 0.0};
  m.validate();
  return m;
}

NoiseModel NoiseModel::phenomenological(double p_phys, double p_meas) {
  NoiseModel m{NoiseKind::phenomenological, p_phys, p_meas};
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (!(p_phys >= 0.0 && p_phys <= 1.0)) throw std::invalid_argument("p_phys must be in [0,1]");
  if (!(p_meas >= 0.0 && p_meas <= 1.0)) throw std::invalid_argument("p_meas must be in [0,1]");
  if (kind == NoiseKind::code_capacity_depolarizing && p_meas != 0.0) {
    throw std::invalid_argument("code-capacity noise requires p_meas = 0");
  }
}

std::pair<BitVector, BitVector> sample_error(const SurfaceCode& code, const NoiseModel& noise,
                                             Rng& rng) {
  noise.validate();
  BitVector x_err(static_cast<std::size_t>(code.n_data));
  BitVector z_err(static_cast<std::size_t>(code.n_data));
  for (int q = 0; q < code.n_data; ++q) {
    double u = rng.uniform01();
    if (u >= noise.p_phys) continue;
    double third = noise.p_phys / 3.0;
    if (u < third) {
      x_err.set(q, 1);  // X
    } else if (u < 2.0 * third) {
      x_err.set(q, 1);  // Y
      z_err.set(q, 1);
    } else {
      z_err.set(q, 1);  // Z
    }
  }
  return {x_err, z_err};
}

std::uint8_t SyndromeHistory::event(const SurfaceCode& code, bool z_type, std::size_t index,
                                    int round) const {
  const Stabilizer& stab = z_type ? code.z_stabilizers[index] : code.x_stabilizers[index];
  return grid_at(round, z_type ? 1 : 0, stab.cell_row, stab.cell_col);
}

std::vector<std::uint8_t> embed_syndrome_grid(const SurfaceCode& code,
                                              const std::vector<BitVector>& x_events,
                                              const std::vector<BitVector>& z_events) {
  if (x_events.size() != z_events.size() || x_events.empty()) {
    throw std::invalid_argument("embed_syndrome_grid: need one X and one Z vector per round");
  }
  const int g = code.grid_size();
  const std::size_t rounds = x_events.size();
  std::vector<std::uint8_t> grid(rounds * 2 * static_cast<std::size_t>(g) * static_cast<std::size_t>(g), 0);
  auto idx = [g](std::size_t round, int channel, int row, int col) {
    return ((round * 2 + static_cast<std::size_t>(channel)) * static_cast<std::size_t>(g) +
            static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(g) +
           static_cast<std::size_t>(col);
  };
  for (std::size_t k = 0; k < rounds; ++k) {
    if (x_events[k].size() != code.x_stabilizers.size() ||
        z_events[k].size() != code.z_stabilizers.size()) {
      throw std::invalid_argument("embed_syndrome_grid: syndrome length mismatch");
    }
    for (std::size_t i = 0; i < code.x_stabilizers.size(); ++i) {
      const Stabilizer& s = code.x_stabilizers[i];
      grid[idx(k, 0, s.cell_row, s.cell_col)] = x_events[k].bit(i);
    }
    for (std::size_t i = 0; i < code.z_stabilizers.size(); ++i) {
      const Stabilizer& s = code.z_stabilizers[i];
      grid[idx(k, 1, s.cell_row, s.cell_col)] = z_events[k].bit(i);
    }
  }
  return grid;
}

Sample run_memory_experiment(const SurfaceCode& code, const NoiseModel& noise, int rounds, Rng& rng,
                             int num_label_bits, bool keep_true_error) {
  noise.validate();
  if (rounds < 1) throw std::invalid_argument("run_memory_experiment: rounds must be >= 1");

  BitVector acc_x(static_cast<std::size_t>(code.n_data));
  BitVector acc_z(static_cast<std::size_t>(code.n_data));
  std::vector<BitVector> raw_x, raw_z;
  raw_x.reserve(static_cast<std::size_t>(rounds));
  raw_z.reserve(static_cast<std::size_t>(rounds));

  for (int k = 0; k < rounds; ++k) {
    auto [x_new, z_new] = sample_error(code, noise, rng);
    acc_x.xor_with(x_new);
    acc_z.xor_with(z_new);
    auto [s_x, s_z] = syndrome_of(code, acc_x, acc_z);
    const bool terminal = (k == rounds - 1);  // perfect terminal readout
    if (!terminal && noise.p_meas > 0.0) {
      for (std::size_t i = 0; i < s_x.size(); ++i) {
        if (rng.bernoulli(noise.p_meas)) s_x.flip(i);
      }
      for (std::size_t i = 0; i < s_z.size(); ++i) {
        if (rng.bernoulli(noise.p_meas)) s_z.flip(i);
      }
    }
    raw_x.push_back(std::move(s_x));
    raw_z.push_back(std::move(s_z));
  }

  // Detection events: round 0 is the raw syndrome, later rounds the XOR of
  // consecutive raw syndromes.
  std::vector<BitVector> ev_x = raw_x, ev_z = raw_z;
  for (int k = rounds - 1; k >= 1; --k) {
    ev_x[static_cast<std::size_t>(k)].xor_with(raw_x[static_cast<std::size_t>(k) - 1]);
    ev_z[static_cast<std::size_t>(k)].xor_with(raw_z[static_cast<std::size_t>(k) - 1]);
  }

  Sample sample;
  sample.history.rounds = rounds;
  sample.history.grid_size = code.grid_size();
  sample.history.grid = embed_syndrome_grid(code, ev_x, ev_z);
  sample.history.raw_x = std::move(raw_x);
  sample.history.raw_z = std::move(raw_z);
  sample.label = logical_effect(code, acc_x, acc_z, num_label_bits);
  if (keep_true_error) sample.true_error = std::make_pair(acc_x, acc_z);
  sample.meta.distance = code.distance;
  sample.meta.rounds = rounds;
  sample.meta.noise = noise;
  return sample;
}

}  // namespace diffqec
