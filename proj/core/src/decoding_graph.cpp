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

#include "diffqec/decoding_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace diffqec {

namespace {

constexpr double kProbClamp = 1e-9;

double log_odds_weight(double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return std::log((1.0 - p) / p);
}

// Dijkstra from `source`, weights floored at zero (negative log-odds can
// appear after aggressive reweighting; flooring keeps paths well-defined).
void dijkstra(const DecodingGraph& g, const std::vector<std::vector<int>>& adjacency, int source,
              double* dist_row, int* pred_row) {
  const int n = g.num_nodes();
  std::fill(dist_row, dist_row + n, std::numeric_limits<double>::infinity());
  std::fill(pred_row, pred_row + n, -1);
  dist_row[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist_row[u]) continue;
    for (int ei : adjacency[static_cast<std::size_t>(u)]) {
      const auto& e = g.edges[static_cast<std::size_t>(ei)];
      int v = (e.u == u) ? e.v : e.u;
      double w = std::max(0.0, e.weight);
      if (dist_row[u] + w < dist_row[v]) {
        dist_row[v] = dist_row[u] + w;
        pred_row[v] = ei;
        heap.emplace(dist_row[v], v);
      }
    }
  }
}

void compute_all_pairs(DecodingGraph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    adjacency[static_cast<std::size_t>(g.edges[i].u)].push_back(static_cast<int>(i));
    adjacency[static_cast<std::size_t>(g.edges[i].v)].push_back(static_cast<int>(i));
  }
  g.dist.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  g.pred_edge.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s) {
    dijkstra(g, adjacency, s,
             g.dist.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(n),
             g.pred_edge.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(n));
  }
  g.has_negative_weights = std::any_of(g.edges.begin(), g.edges.end(),
                                       [](const auto& e) { return e.weight < 0.0; });
}

}  // namespace

void DecodingGraph::apply_path(int from, int to, BitVector& correction) const {
  const int n = num_nodes();
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw std::invalid_argument("apply_path: node out of range");
  }
  const int* pred_row = pred_edge.data() + static_cast<std::size_t>(from) * static_cast<std::size_t>(n);
  int at = to;
  while (at != from) {
    int ei = pred_row[at];
    if (ei < 0) throw std::runtime_error("apply_path: nodes are not connected");
    const Edge& e = edges[static_cast<std::size_t>(ei)];
    if (e.qubit >= 0) correction.flip(static_cast<std::size_t>(e.qubit));
    at = (e.u == at) ? e.v : e.u;
  }
}

DecodingGraph build_decoding_graph(const SurfaceCode& code, const NoiseModel& noise, int rounds,
                                   bool z_type) {
  noise.validate();
  if (rounds < 1) throw std::invalid_argument("build_decoding_graph: rounds must be >= 1");

  DecodingGraph g;
  g.z_type = z_type;
  g.rounds = rounds;
  g.n_data = code.n_data;
  const auto& stabs = z_type ? code.z_stabilizers : code.x_stabilizers;
  g.stab_count = static_cast<int>(stabs.size());

  // Which stabilizers of this type contain each qubit.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(code.n_data));
  for (int si = 0; si < g.stab_count; ++si) {
    for (int q : stabs[static_cast<std::size_t>(si)].support) {
      members[static_cast<std::size_t>(q)].push_back(si);
    }
  }

  // A depolarizing flip of the component this graph sees happens with
  // probability P(X) + P(Y) = 2p/3 (or P(Z) + P(Y) for the X-type graph).
  const double p_space = 2.0 * noise.p_phys / 3.0;
  const double w_space = log_odds_weight(p_space);

  for (int round = 0; round < rounds; ++round) {
    for (int q = 0; q < code.n_data; ++q) {
      const auto& owners = members[static_cast<std::size_t>(q)];
      if (owners.empty()) continue;
      DecodingGraph::Edge e;
      e.qubit = q;
      e.prob = p_space;
      e.weight = w_space;
      if (owners.size() == 2) {
        e.u = g.node(owners[0], round);
        e.v = g.node(owners[1], round);
      } else if (owners.size() == 1) {
        e.u = g.node(owners[0], round);
        e.v = g.boundary();
      } else {
        throw std::logic_error("build_decoding_graph: qubit in more than two same-type stabilizers");
      }
      g.edges.push_back(e);
    }
  }

  if (noise.p_meas > 0.0 && rounds > 1) {
    const double w_time = log_odds_weight(noise.p_meas);
    for (int round = 0; round + 1 < rounds; ++round) {
      for (int si = 0; si < g.stab_count; ++si) {
        DecodingGraph::Edge e;
        e.u = g.node(si, round);
        e.v = g.node(si, round + 1);
        e.qubit = -1;
        e.prob = noise.p_meas;
        e.weight = w_time;
        g.edges.push_back(e);
      }
    }
  }

  compute_all_pairs(g);
  return g;
}

DecodingGraph reweight_with_saliency(const DecodingGraph& graph, std::span<const double> qubit_scores,
                                     double lambda) {
  if (qubit_scores.size() != static_cast<std::size_t>(graph.n_data)) {
    throw std::invalid_argument("reweight_with_saliency: score length must equal n_data");
  }
  if (lambda < 0.0) throw std::invalid_argument("reweight_with_saliency: lambda must be >= 0");
  for (double s : qubit_scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("reweight_with_saliency: score out of [0,1]");
  }
  DecodingGraph out = graph;
  if (lambda == 0.0) return out;
  for (auto& e : out.edges) {
    if (e.qubit < 0) continue;
    double p = std::clamp(e.prob * (1.0 + lambda * qubit_scores[static_cast<std::size_t>(e.qubit)]),
                          kProbClamp, 1.0 - kProbClamp);
    e.prob = p;
    e.weight = std::log((1.0 - p) / p);
  }
  compute_all_pairs(out);
  return out;
}

}  // namespace diffqec
