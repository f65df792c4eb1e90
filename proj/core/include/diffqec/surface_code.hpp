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

#ifndef DIFFQEC_SURFACE_CODE_HPP
#define DIFFQEC_SURFACE_CODE_HPP

#include <string>
#include <utility>
#include <vector>

#include "diffqec/bit_vector.hpp"

namespace diffqec {

/// One stabilizer of the rotated surface code.
///
/// The plaquette sits at half-integer coordinates (face_row + 0.5,
/// face_col + 0.5) on the data-qubit lattice; `cell_row/cell_col` is that
/// coordinate rounded into the (d+1) x (d+1) integer grid used for the
/// spatial syndrome embedding.
struct Stabilizer {
  int face_row = 0;  // face index in [-1, d-1]
  int face_col = 0;
  std::vector<int> support;  // data-qubit indices, ascending
  int cell_row = 0;          // face_row + 1, in [0, d]
  int cell_col = 0;
};

/// Rotated surface code of odd distance d.
///
/// Data qubits live on a d x d grid, index q = row * d + col. Weight-4
/// plaquettes tile the interior in a checkerboard; weight-2 plaquettes sit
/// on the boundary (X-type on the top/bottom edges, Z-type on the
/// left/right edges, alternating positions). The logical X operator is the
/// left column of data qubits and the logical Z operator is the top row;
/// these are the weight-d string representatives consistent with that
/// boundary coloring.
struct SurfaceCode {
  int distance = 0;
  int n_data = 0;
  std::vector<std::pair<int, int>> data_coords;  // (row, col) per qubit index
  std::vector<Stabilizer> x_stabilizers;
  std::vector<Stabilizer> z_stabilizers;
  BinaryMatrix h_x;  // (#x_stabilizers x n_data)
  BinaryMatrix h_z;  // (#z_stabilizers x n_data)
  BitVector logical_x;  // X-type logical, support on the left column
  BitVector logical_z;  // Z-type logical, support on the top row

  int grid_size() const { return distance + 1; }
  std::size_t num_stabilizers() const { return x_stabilizers.size() + z_stabilizers.size(); }
  int qubit_index(int row, int col) const { return row * distance + col; }

  /// Debug export: geometry, parity-check rows, and logical operators as a
  /// structured-text (JSON) document.
  std::string describe() const;
};

/// Deterministic construction; throws std::invalid_argument unless d is odd
/// and >= 3.
SurfaceCode build_rotated_surface_code(int distance);

/// Syndromes of a Pauli error given as X/Z bit patterns over data qubits.
/// Returns (s_x, s_z) where s_x = H_x * z_err and s_z = H_z * x_err (mod 2):
/// X-type stabilizers detect Z errors and vice versa.
std::pair<BitVector, BitVector> syndrome_of(const SurfaceCode& code, const BitVector& x_err,
                                            const BitVector& z_err);

/// Logical label of an error. Bit 0 = logical_z . x_err (an X-type error
/// flipping the Z-basis observable). In dual-observable mode
/// (num_label_bits = 2), bit 1 = logical_x . z_err.
BitVector logical_effect(const SurfaceCode& code, const BitVector& x_err, const BitVector& z_err,
                         int num_label_bits = 1);

}  // namespace diffqec

#endif  // DIFFQEC_SURFACE_CODE_HPP
