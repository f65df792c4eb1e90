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

#include "diffqec/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace diffqec {

namespace {

using json = nlohmann::ordered_json;

json nest_values(const std::vector<double>& flat, const Shape& shape, int dim, std::size_t& cursor) {
  json arr = json::array();
  if (dim == shape.ndim - 1) {
    for (int i = 0; i < shape[dim]; ++i) arr.push_back(flat[cursor++]);
    return arr;
  }
  for (int i = 0; i < shape[dim]; ++i) arr.push_back(nest_values(flat, shape, dim + 1, cursor));
  return arr;
}

void flatten_values(const json& arr, const Shape& shape, int dim, std::vector<double>& out) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(shape[dim])) {
    throw std::runtime_error("checkpoint: weight array shape mismatch");
  }
  if (dim == shape.ndim - 1) {
    for (const auto& v : arr) {
      if (!v.is_number()) throw std::runtime_error("checkpoint: weight entries must be numbers");
      out.push_back(v.get<double>());
    }
    return;
  }
  for (const auto& sub : arr) flatten_values(sub, shape, dim + 1, out);
}

}  // namespace

void save_checkpoint(const DenoiserParams& params, const NoiseSchedule& schedule,
                     const std::string& path) {
  json doc;
  doc["format"] = kCheckpointFormat;
  const DenoiserConfig& c = params.config;
  doc["config"] = json{{"d", c.distance},
                       {"L", c.label_bits},
                       {"T", c.horizon},
                       {"H", c.hidden},
                       {"K", c.layers},
                       {"conv_channels", {c.conv1_channels, c.conv2_channels}},
                       {"time_embed_dim", c.time_embed_dim},
                       {"chains", c.chains},
                       {"schedule_offset", c.schedule_offset}};
  doc["schedule"] = json{{"T", schedule.horizon},
                         {"offset", schedule.offset},
                         {"betas", std::vector<double>(schedule.betas.begin() + 1, schedule.betas.end())},
                         {"bar_alphas", schedule.bar_alphas}};
  json weights;
  for (const Parameter& p : params.params) {
    std::size_t cursor = 0;
    weights[p.name] = nest_values(p.value, p.shape, 0, cursor);
  }
  doc["params"] = std::move(weights);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << doc.dump() << "\n";
  if (!out) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw std::runtime_error("load_checkpoint: " + path + " is not valid JSON (" +
                             std::string(err.what()) + ")");
  }
  if (!doc.contains("format") || !doc["format"].is_string() ||
      doc["format"].get<std::string>() != kCheckpointFormat) {
    throw std::runtime_error("load_checkpoint: " + path + " has unknown format tag (expected " +
                             std::string(kCheckpointFormat) + ")");
  }

  const json& cfg = doc.at("config");
  DenoiserConfig config;
  config.distance = cfg.at("d").get<int>();
  config.label_bits = cfg.at("L").get<int>();
  config.horizon = cfg.at("T").get<int>();
  config.hidden = cfg.at("H").get<int>();
  config.layers = cfg.at("K").get<int>();
  config.conv1_channels = cfg.at("conv_channels").at(0).get<int>();
  config.conv2_channels = cfg.at("conv_channels").at(1).get<int>();
  config.time_embed_dim = cfg.at("time_embed_dim").get<int>();
  config.chains = cfg.at("chains").get<int>();
  config.schedule_offset = cfg.at("schedule_offset").get<double>();
  config.validate();

  Checkpoint ckpt;
  Rng scratch(0);
  ckpt.params = DenoiserParams::init(config, scratch);  // shapes; values overwritten below

  const json& weights = doc.at("params");
  for (Parameter& p : ckpt.params.params) {
    if (!weights.contains(p.name)) {
      throw std::runtime_error("load_checkpoint: missing weight array " + p.name);
    }
    std::vector<double> flat;
    flat.reserve(p.size());
    flatten_values(weights.at(p.name), p.shape, 0, flat);
    if (flat.size() != p.size()) throw std::runtime_error("load_checkpoint: bad size for " + p.name);
    p.value = std::move(flat);
  }
  if (weights.size() != ckpt.params.params.size()) {
    throw std::runtime_error("load_checkpoint: unexpected extra weight arrays");
  }

  const json& sched = doc.at("schedule");
  ckpt.schedule.horizon = sched.at("T").get<int>();
  ckpt.schedule.offset = sched.at("offset").get<double>();
  std::vector<double> betas = sched.at("betas").get<std::vector<double>>();
  if (betas.size() != static_cast<std::size_t>(ckpt.schedule.horizon)) {
    throw std::runtime_error("load_checkpoint: schedule beta count mismatch");
  }
  ckpt.schedule.betas.assign(1, 0.0);
  ckpt.schedule.betas.insert(ckpt.schedule.betas.end(), betas.begin(), betas.end());
  ckpt.schedule.bar_alphas = sched.at("bar_alphas").get<std::vector<double>>();
  if (ckpt.schedule.bar_alphas.size() != static_cast<std::size_t>(ckpt.schedule.horizon) + 1) {
    throw std::runtime_error("load_checkpoint: schedule bar_alpha count mismatch");
  }
  return ckpt;
}

}  // namespace diffqec
