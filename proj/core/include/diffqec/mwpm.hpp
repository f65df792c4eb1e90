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

#ifndef DIFFQEC_MWPM_HPP
#define DIFFQEC_MWPM_HPP

#include <vector>

#include "diffqec/decoding_graph.hpp"
#include "diffqec/noise_sim.hpp"
#include "diffqec/surface_code.hpp"

namespace diffqec {

/// Defect count up to which the subset dynamic program (exact matching) is
/// used; above it a greedy nearest-pair fallback runs and flags the result.
inline constexpr int kExactMatchingLimit = 16;

struct MwpmResult {
  BitVector correction;  // data-qubit flips of this graph's Pauli type
  BitVector label;       // logical effect of the correction (1 bit per graph)
  double weight = 0.0;   // total matching weight
  bool exact = true;     // false when the greedy fallback was used
};

/// Minimum-weight matching of the defect set against itself and the
/// boundary, over shortest-path distances. Exact (subset DP, O(2^k k)) for
/// k <= 16 defects; greedy beyond that.
MwpmResult mwpm_decode(const DecodingGraph& graph, const std::vector<int>& defects,
                       const SurfaceCode& code);

/// Extracts this graph's defect nodes from a detection-event history.
std::vector<int> defects_from_history(const DecodingGraph& graph, const SurfaceCode& code,
                                      const SyndromeHistory& history);

/// Memory-experiment decode: runs the graphs that contribute label bits
/// (Z-graph for bit 0; X-graph too when L = 2).
struct MwpmShotResult {
  BitVector label;
  double weight = 0.0;
  bool exact = true;
};
MwpmShotResult mwpm_decode_shot(const SurfaceCode& code, const DecodingGraph& z_graph,
                                const DecodingGraph* x_graph, const SyndromeHistory& history,
                                int num_label_bits);

}  // namespace diffqec

#endif  // DIFFQEC_MWPM_HPP
