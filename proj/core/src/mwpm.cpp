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

#include "diffqec/mwpm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace diffqec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BitVector graph_label(const DecodingGraph& graph, const SurfaceCode& code,
                      const BitVector& correction) {
  BitVector label(1);
  label.set(0, graph.z_type ? code.logical_z.dot(correction) : code.logical_x.dot(correction));
  return label;
}

}  // namespace

MwpmResult mwpm_decode(const DecodingGraph& graph, const std::vector<int>& defects,
                       const SurfaceCode& code) {
  const int n_nodes = graph.num_nodes();
  for (int d : defects) {
    if (d < 0 || d >= n_nodes || d == graph.boundary()) {
      throw std::invalid_argument("mwpm_decode: defect node not in graph");
    }
  }

  MwpmResult result;
  result.correction = BitVector(static_cast<std::size_t>(graph.n_data));
  const int k = static_cast<int>(defects.size());
  if (k == 0) {
    result.label = graph_label(graph, code, result.correction);
    return result;
  }

  auto pair_cost = [&](int i, int j) { return graph.distance(defects[static_cast<std::size_t>(i)],
                                                             defects[static_cast<std::size_t>(j)]); };
  auto boundary_cost = [&](int i) { return graph.distance(defects[static_cast<std::size_t>(i)],
                                                          graph.boundary()); };

  std::vector<std::pair<int, int>> matches;  // (i, j) with j = -1 for boundary

  if (k <= kExactMatchingLimit) {
    const std::size_t full = 1ULL << k;
    std::vector<double> dp(full, kInf);
    std::vector<std::pair<int, int>> choice(full, {-1, -1});
    dp[0] = 0.0;
    for (std::size_t mask = 1; mask < full; ++mask) {
      int i = 0;
      while (((mask >> i) & 1ULL) == 0) ++i;
      const std::size_t rest = mask ^ (1ULL << i);
      double best = dp[rest] + boundary_cost(i);
      std::pair<int, int> best_choice{i, -1};
      for (int j = i + 1; j < k; ++j) {
        if (((rest >> j) & 1ULL) == 0) continue;
        double cand = dp[rest ^ (1ULL << j)] + pair_cost(i, j);
        if (cand < best) {
          best = cand;
          best_choice = {i, j};
        }
      }
      dp[mask] = best;
      choice[mask] = best_choice;
    }
    if (!std::isfinite(dp[full - 1])) throw std::runtime_error("mwpm_decode: defects are unmatchable");
    std::size_t mask = full - 1;
    while (mask != 0) {
      auto [i, j] = choice[mask];
      matches.emplace_back(i, j);
      mask ^= (1ULL << i);
      if (j >= 0) mask ^= (1ULL << j);
    }
    result.exact = true;
  } else {
    // Greedy nearest-option fallback; flagged as non-exact.
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    int remaining = k;
    while (remaining > 0) {
      double best = kInf;
      std::pair<int, int> best_choice{-1, -1};
      for (int i = 0; i < k; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        double bc = boundary_cost(i);
        if (bc < best) {
          best = bc;
          best_choice = {i, -1};
        }
        for (int j = i + 1; j < k; ++j) {
          if (used[static_cast<std::size_t>(j)]) continue;
          double pc = pair_cost(i, j);
          if (pc < best) {
            best = pc;
            best_choice = {i, j};
          }
        }
      }
      if (best_choice.first < 0) throw std::runtime_error("mwpm_decode: defects are unmatchable");
      matches.push_back(best_choice);
      used[static_cast<std::size_t>(best_choice.first)] = true;
      --remaining;
      if (best_choice.second >= 0) {
        used[static_cast<std::size_t>(best_choice.second)] = true;
        --remaining;
      }
    }
    result.exact = false;
  }

  for (auto [i, j] : matches) {
    int from = defects[static_cast<std::size_t>(i)];
    int to = j >= 0 ? defects[static_cast<std::size_t>(j)] : graph.boundary();
    result.weight += graph.distance(from, to);
    graph.apply_path(from, to, result.correction);
  }
  result.label = graph_label(graph, code, result.correction);
  return result;
}

std::vector<int> defects_from_history(const DecodingGraph& graph, const SurfaceCode& code,
                                      const SyndromeHistory& history) {
  if (history.rounds != graph.rounds) {
    throw std::invalid_argument("defects_from_history: round count mismatch");
  }
  std::vector<int> defects;
  for (int round = 0; round < history.rounds; ++round) {
    for (int si = 0; si < graph.stab_count; ++si) {
      if (history.event(code, graph.z_type, static_cast<std::size_t>(si), round)) {
        defects.push_back(graph.node(si, round));
      }
    }
  }
  return defects;
}

MwpmShotResult mwpm_decode_shot(const SurfaceCode& code, const DecodingGraph& z_graph,
                                const DecodingGraph* x_graph, const SyndromeHistory& history,
                                int num_label_bits) {
  MwpmShotResult out;
  out.label = BitVector(static_cast<std::size_t>(num_label_bits));
  MwpmResult z_res = mwpm_decode(z_graph, defects_from_history(z_graph, code, history), code);
  out.label.set(0, z_res.label.bit(0));
  out.weight = z_res.weight;
  out.exact = z_res.exact;
  if (num_label_bits == 2) {
    if (x_graph == nullptr) throw std::invalid_argument("mwpm_decode_shot: X graph required for L=2");
    MwpmResult x_res = mwpm_decode(*x_graph, defects_from_history(*x_graph, code, history), code);
    out.label.set(1, x_res.label.bit(0));
    out.weight += x_res.weight;
    out.exact = out.exact && x_res.exact;
  }
  return out;
}

}  // namespace diffqec
