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

#include "diffqec/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace diffqec {

namespace {

using json = nlohmann::ordered_json;

json grid_to_json(const SyndromeHistory& history) {
  const int g = history.grid_size;
  json rounds = json::array();
  for (int k = 0; k < history.rounds; ++k) {
    json channels = json::array();
    for (int ch = 0; ch < 2; ++ch) {
      json rows = json::array();
      for (int r = 0; r < g; ++r) {
        std::vector<int> row(static_cast<std::size_t>(g));
        for (int c = 0; c < g; ++c) row[static_cast<std::size_t>(c)] = history.grid_at(k, ch, r, c);
        rows.push_back(row);
      }
      channels.push_back(rows);
    }
    rounds.push_back(channels);
  }
  return rounds;
}

std::vector<int> bits_to_ints(const BitVector& v) {
  return std::vector<int>(v.bits().begin(), v.bits().end());
}

BitVector ints_to_bits(const json& arr) {
  BitVector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    int b = arr[i].get<int>();
    if (b != 0 && b != 1) throw std::runtime_error("dataset: bit entries must be 0 or 1");
    v.set(i, static_cast<std::uint8_t>(b));
  }
  return v;
}

json noise_to_json(const NoiseModel& noise) {
  return json{{"kind", to_string(noise.kind)}, {"p_phys", noise.p_phys}, {"p_meas", noise.p_meas}};
}

NoiseModel noise_from_json(const json& obj) {
  NoiseModel noise;
  noise.kind = noise_kind_from_string(obj.at("kind").get<std::string>());
  noise.p_phys = obj.at("p_phys").get<double>();
  noise.p_meas = obj.at("p_meas").get<double>();
  noise.validate();
  return noise;
}

}  // namespace

DatasetSummary generate_dataset(const SurfaceCode& code, const DatasetConfig& config,
                                const std::string& path) {
  config.noise.validate();
  if (config.shots < 1) throw std::invalid_argument("generate_dataset: shots must be >= 1");
  if (config.distance != code.distance) {
    throw std::invalid_argument("generate_dataset: config distance does not match code");
  }
  if (config.rounds < 1) throw std::invalid_argument("generate_dataset: rounds must be >= 1");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("generate_dataset: cannot open " + path + " for writing");

  json header;
  header["format"] = kDatasetFormat;
  header["d"] = config.distance;
  header["r"] = config.rounds;
  header["L"] = config.label_bits;
  header["noise"] = noise_to_json(config.noise);
  header["shots"] = config.shots;
  header["seed"] = config.seed;
  header["store_true_error"] = config.store_true_error;
  out << header.dump() << "\n";

  std::uint64_t labeled = 0;
  for (std::uint64_t shot = 0; shot < config.shots; ++shot) {
    Rng rng = Rng::for_stream(config.seed, shot);
    Sample sample = run_memory_experiment(code, config.noise, config.rounds, rng,
                                          config.label_bits, config.store_true_error);
    if (sample.label.weight() > 0) ++labeled;
    json line;
    line["d"] = config.distance;
    line["r"] = config.rounds;
    line["grid"] = grid_to_json(sample.history);
    line["label"] = bits_to_ints(sample.label);
    if (config.store_true_error) {
      line["true_x"] = bits_to_ints(sample.true_error->first);
      line["true_z"] = bits_to_ints(sample.true_error->second);
    }
    out << line.dump() << "\n";
  }
  if (!out) throw std::runtime_error("generate_dataset: write failure on " + path);

  DatasetSummary summary;
  summary.shots = config.shots;
  summary.label_one_rate = static_cast<double>(labeled) / static_cast<double>(config.shots);
  summary.path = path;
  return summary;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_dataset: empty file " + path);
  json header = json::parse(line);
  if (!header.contains("format") || header["format"].get<std::string>() != kDatasetFormat) {
    throw std::runtime_error("load_dataset: " + path + " has unknown format tag (expected " +
                             std::string(kDatasetFormat) + ")");
  }

  Dataset ds;
  ds.config.distance = header.at("d").get<int>();
  ds.config.rounds = header.at("r").get<int>();
  ds.config.label_bits = header.at("L").get<int>();
  ds.config.noise = noise_from_json(header.at("noise"));
  ds.config.shots = header.at("shots").get<std::uint64_t>();
  ds.config.seed = header.at("seed").get<std::uint64_t>();
  ds.config.store_true_error = header.at("store_true_error").get<bool>();

  const int g = ds.config.distance + 1;
  ds.samples.reserve(ds.config.shots);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json obj = json::parse(line);
    Sample sample;
    sample.meta.distance = obj.at("d").get<int>();
    sample.meta.rounds = obj.at("r").get<int>();
    sample.meta.noise = ds.config.noise;
    sample.meta.seed = ds.config.seed;
    if (sample.meta.distance != ds.config.distance || sample.meta.rounds != ds.config.rounds) {
      throw std::runtime_error("load_dataset: shot metadata disagrees with header");
    }
    const json& grid = obj.at("grid");
    sample.history.rounds = sample.meta.rounds;
    sample.history.grid_size = g;
    sample.history.grid.resize(static_cast<std::size_t>(sample.meta.rounds) * 2 *
                               static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
    if (grid.size() != static_cast<std::size_t>(sample.meta.rounds)) {
      throw std::runtime_error("load_dataset: grid round count mismatch");
    }
    std::size_t flat = 0;
    for (const auto& channels : grid) {
      if (channels.size() != 2) throw std::runtime_error("load_dataset: grid channel count mismatch");
      for (const auto& rows : channels) {
        if (rows.size() != static_cast<std::size_t>(g)) {
          throw std::runtime_error("load_dataset: grid row count mismatch");
        }
        for (const auto& row : rows) {
          if (row.size() != static_cast<std::size_t>(g)) {
            throw std::runtime_error("load_dataset: grid column count mismatch");
          }
          for (const auto& cell : row) {
            int b = cell.get<int>();
            if (b != 0 && b != 1) throw std::runtime_error("load_dataset: grid entries must be bits");
            sample.history.grid[flat++] = static_cast<std::uint8_t>(b);
          }
        }
      }
    }
    sample.label = ints_to_bits(obj.at("label"));
    if (sample.label.size() != static_cast<std::size_t>(ds.config.label_bits)) {
      throw std::runtime_error("load_dataset: label length mismatch");
    }
    if (obj.contains("true_x")) {
      sample.true_error = std::make_pair(ints_to_bits(obj.at("true_x")), ints_to_bits(obj.at("true_z")));
    }
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.size() != ds.config.shots) {
    throw std::runtime_error("load_dataset: shot count disagrees with header");
  }
  return ds;
}

}  // namespace diffqec
