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

#ifndef DIFFQEC_DATASET_HPP
#define DIFFQEC_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "diffqec/noise_sim.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

inline constexpr const char* kDatasetFormat = "diffqec-ds-1";

struct DatasetConfig {
  int distance = 3;
  int rounds = 1;
  int label_bits = 1;
  NoiseModel noise;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool store_true_error = true;
};

struct DatasetSummary {
  std::uint64_t shots = 0;
  double label_one_rate = 0.0;  // fraction of shots with any label bit set
  std::string path;
};

/// Writes `config.shots` memory-experiment samples as JSON lines, preceded
/// by a header line carrying the config, the seed, and the format tag.
/// Per-shot randomness is counter-seeded from (seed, shot index), so the
/// output is byte-identical across runs and independent of generation
/// order.
DatasetSummary generate_dataset(const SurfaceCode& code, const DatasetConfig& config,
                                const std::string& path);

/// In-memory dataset. Loaded samples carry the event grid and label (plus
/// the true error when stored); raw per-round syndromes are not persisted.
struct Dataset {
  DatasetConfig config;
  std::vector<Sample> samples;
};

/// Parses a dataset file, validating the format tag and per-line shapes.
Dataset load_dataset(const std::string& path);

}  // namespace diffqec

#endif  // DIFFQEC_DATASET_HPP
