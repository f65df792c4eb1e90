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

#include "diffqec/surface_code.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace diffqec {

namespace {

// A face (fi, fj) covers the up-to-four data qubits
// {(fi,fj),(fi,fj+1),(fi+1,fj),(fi+1,fj+1)} that fall inside the lattice.
std::vector<int> face_support(int d, int fi, int fj) {
  std::vector<int> support;
  for (int r = fi; r <= fi + 1; ++r) {
    for (int c = fj; c <= fj + 1; ++c) {
      if (r >= 0 && r < d && c >= 0 && c < d) support.push_back(r * d + c);
    }
  }
  std::sort(support.begin(), support.end());
  return support;
}

bool face_is_z_type(int fi, int fj) {
  // Checkerboard coloring; (fi + fj) is kept non-negative before the mod.
  return ((fi + fj + 2) % 2) == 0;
}

// Faces kept by the rotated layout: all interior faces, plus the weight-2
// boundary faces whose color matches their edge (X on top/bottom, Z on
// left/right). Corner faces (weight 1) are never stabilizers.
bool face_is_kept(int d, int fi, int fj) {
  bool top = fi == -1, bottom = fi == d - 1, left = fj == -1, right = fj == d - 1;
  bool z_type = face_is_z_type(fi, fj);
  if ((top || bottom) && (left || right)) return false;  // corner
  if (top || bottom) return !z_type;
  if (left || right) return z_type;
  return true;  // interior
}

}  // namespace

SurfaceCode build_rotated_surface_code(int distance) {
  if (distance < 3 || distance % 2 == 0) {
    throw std::invalid_argument("surface code distance must be odd and >= 3");
  }
  const int d = distance;

  SurfaceCode code;
  code.distance = d;
  code.n_data = d * d;
  code.data_coords.reserve(static_cast<std::size_t>(code.n_data));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) code.data_coords.emplace_back(r, c);
  }

  for (int fi = -1; fi <= d - 1; ++fi) {
    for (int fj = -1; fj <= d - 1; ++fj) {
      if (!face_is_kept(d, fi, fj)) continue;
      Stabilizer stab;
      stab.face_row = fi;
      stab.face_col = fj;
      stab.support = face_support(d, fi, fj);
      stab.cell_row = fi + 1;
      stab.cell_col = fj + 1;
      if (face_is_z_type(fi, fj)) {
        code.z_stabilizers.push_back(std::move(stab));
      } else {
        code.x_stabilizers.push_back(std::move(stab));
      }
    }
  }

  code.h_x = BinaryMatrix(code.x_stabilizers.size(), code.n_data);
  for (std::size_t i = 0; i < code.x_stabilizers.size(); ++i) {
    for (int q : code.x_stabilizers[i].support) code.h_x.set(i, q, 1);
  }
  code.h_z = BinaryMatrix(code.z_stabilizers.size(), code.n_data);
  for (std::size_t i = 0; i < code.z_stabilizers.size(); ++i) {
    for (int q : code.z_stabilizers[i].support) code.h_z.set(i, q, 1);
  }

  code.logical_x = BitVector(static_cast<std::size_t>(code.n_data));
  code.logical_z = BitVector(static_cast<std::size_t>(code.n_data));
  for (int r = 0; r < d; ++r) code.logical_x.set(code.qubit_index(r, 0), 1);
  for (int c = 0; c < d; ++c) code.logical_z.set(code.qubit_index(0, c), 1);

  return code;
}

std::pair<BitVector, BitVector> syndrome_of(const SurfaceCode& code, const BitVector& x_err,
                                            const BitVector& z_err) {
  if (x_err.size() != static_cast<std::size_t>(code.n_data) ||
      z_err.size() != static_cast<std::size_t>(code.n_data)) {
    throw std::invalid_argument("syndrome_of: error vector length must equal n_data");
  }
  return {code.h_x.mul(z_err), code.h_z.mul(x_err)};
}

BitVector logical_effect(const SurfaceCode& code, const BitVector& x_err, const BitVector& z_err,
                         int num_label_bits) {
  if (x_err.size() != static_cast<std::size_t>(code.n_data) ||
      z_err.size() != static_cast<std::size_t>(code.n_data)) {
    throw std::invalid_argument("logical_effect: error vector length must equal n_data");
  }
  if (num_label_bits != 1 && num_label_bits != 2) {
    throw std::invalid_argument("logical_effect: num_label_bits must be 1 or 2");
  }
  BitVector label(static_cast<std::size_t>(num_label_bits));
  label.set(0, code.logical_z.dot(x_err));
  if (num_label_bits == 2) label.set(1, code.logical_x.dot(z_err));
  return label;
}

std::string SurfaceCode::describe() const {
  nlohmann::ordered_json doc;
  doc["distance"] = distance;
  doc["n_data"] = n_data;
  auto stab_list = [](const std::vector<Stabilizer>& stabs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : stabs) {
      arr.push_back({{"face", {s.face_row, s.face_col}},
                     {"cell", {s.cell_row, s.cell_col}},
                     {"support", s.support}});
    }
    return arr;
  };
  doc["x_stabilizers"] = stab_list(x_stabilizers);
  doc["z_stabilizers"] = stab_list(z_stabilizers);
  auto matrix_rows = [](const BinaryMatrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::vector<int> row(m.cols());
      for (std::size_t c = 0; c < m.cols(); ++c) row[c] = m.at(r, c);
      rows.push_back(row);
    }
    return rows;
  };
  doc["h_x"] = matrix_rows(h_x);
  doc["h_z"] = matrix_rows(h_z);
  std::vector<int> lx(logical_x.bits().begin(), logical_x.bits().end());
  std::vector<int> lz(logical_z.bits().begin(), logical_z.bits().end());
  doc["logical_x"] = lx;
  doc["logical_z"] = lz;
  return doc.dump(2);
}

}  // namespace diffqec
