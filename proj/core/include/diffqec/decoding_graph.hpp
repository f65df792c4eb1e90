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

#ifndef DIFFQEC_DECODING_GRAPH_HPP
#define DIFFQEC_DECODING_GRAPH_HPP

#include <span>
#include <vector>

#include "diffqec/noise_sim.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

/// Space-time matching graph for one stabilizer type.
///
/// Nodes are detector sites (stabilizer index, round) plus one virtual
/// boundary node (index rounds * stab_count). Spatial edges carry the data
/// qubit whose flip triggers both endpoints; time-like edges carry a
/// measurement-flip marker (qubit = -1). Edge weights are negative
/// log-odds ln((1-p)/p) of the mechanism probability, with p clamped to
/// [1e-9, 1-1e-9]. All-pairs shortest paths (with predecessor edges for
/// correction reconstruction) are computed at build time. If saliency
/// reweighting drives an edge probability past 1/2 the weight goes
/// negative: the graph is flagged and path search floors such weights at
/// zero.
struct DecodingGraph {
  bool z_type = true;  // true: detectors are Z-stabilizers (detect X flips)
  int rounds = 1;
  int stab_count = 0;
  int n_data = 0;

  struct Edge {
    int u = 0, v = 0;     // node indices (v may be the boundary)
    int qubit = -1;       // data-qubit index; -1 for time-like edges
    double prob = 0.0;    // mechanism probability before the log-odds map
    double weight = 0.0;  // ln((1-p)/p)
  };
  std::vector<Edge> edges;
  bool has_negative_weights = false;

  // Row-major (num_nodes x num_nodes) shortest-path distances and, per
  // (source, node), the edge leading back toward the source.
  std::vector<double> dist;
  std::vector<int> pred_edge;

  int node(int stab, int round) const { return round * stab_count + stab; }
  int boundary() const { return rounds * stab_count; }
  int num_nodes() const { return rounds * stab_count + 1; }
  double distance(int a, int b) const {
    return dist[static_cast<std::size_t>(a) * static_cast<std::size_t>(num_nodes()) +
                static_cast<std::size_t>(b)];
  }

  /// XORs the data-qubit supports of the shortest path from `from` to `to`
  /// into `correction`.
  void apply_path(int from, int to, BitVector& correction) const;
};

/// Builds the graph for one stabilizer type. Under depolarizing noise the
/// spatial edge probability is 2*p_phys/3 (the two Pauli components the
/// detector type sees); time-like edges use p_meas and exist only between
/// consecutive noisy rounds (the terminal round is read out perfectly).
DecodingGraph build_decoding_graph(const SurfaceCode& code, const NoiseModel& noise, int rounds,
                                   bool z_type);

/// Saliency reweighting: spatial edges through qubit j get
/// p' = clamp(p * (1 + lambda * score_j), 1e-9, 1 - 1e-9); time-like edges
/// are untouched. lambda = 0 returns an identical graph. Scores must lie in
/// [0, 1]. Shortest paths are recomputed.
DecodingGraph reweight_with_saliency(const DecodingGraph& graph, std::span<const double> qubit_scores,
                                     double lambda);

}  // namespace diffqec

#endif  // DIFFQEC_DECODING_GRAPH_HPP
