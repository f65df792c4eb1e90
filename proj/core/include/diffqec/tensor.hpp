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

#ifndef DIFFQEC_TENSOR_HPP
#define DIFFQEC_TENSOR_HPP

#include <array>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffqec {

/// Dense shape with up to four dimensions.
struct Shape {
  std::array<int, 4> dims{1, 1, 1, 1};
  int ndim = 0;

  Shape() = default;
  Shape(std::initializer_list<int> ds) {
    if (ds.size() > 4) throw std::invalid_argument("Shape supports at most 4 dimensions");
    ndim = static_cast<int>(ds.size());
    int i = 0;
    for (int d : ds) {
      if (d < 0) throw std::invalid_argument("Shape dimensions must be non-negative");
      dims[static_cast<std::size_t>(i++)] = d;
    }
  }

  int operator[](int i) const { return dims[static_cast<std::size_t>(i)]; }

  std::size_t numel() const {
    std::size_t n = 1;
    for (int i = 0; i < ndim; ++i) n *= static_cast<std::size_t>(dims[static_cast<std::size_t>(i)]);
    return n;
  }

  bool operator==(const Shape& other) const {
    if (ndim != other.ndim) return false;
    for (int i = 0; i < ndim; ++i) {
      if (dims[static_cast<std::size_t>(i)] != other.dims[static_cast<std::size_t>(i)]) return false;
    }
    return true;
  }
  bool operator!=(const Shape& other) const { return !(*this == other); }

  std::string to_string() const {
    std::string s = "[";
    for (int i = 0; i < ndim; ++i) {
      if (i) s += ",";
      s += std::to_string(dims[static_cast<std::size_t>(i)]);
    }
    return s + "]";
  }
};

/// Value container; gradients live on the tape, not here.
struct Tensor {
  Shape shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(s), v(s.numel(), 0.0) {}
  Tensor(Shape s, std::vector<double> values) : shape(s), v(std::move(values)) {
    if (v.size() != shape.numel()) throw std::invalid_argument("Tensor value count mismatch");
  }
};

/// Named trainable array with optimizer slots.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  Parameter() = default;
  Parameter(std::string n, Shape s)
      : name(std::move(n)),
        shape(s),
        value(s.numel(), 0.0),
        grad(s.numel(), 0.0),
        adam_m(s.numel(), 0.0),
        adam_v(s.numel(), 0.0) {}

  std::size_t size() const { return value.size(); }
};

}  // namespace diffqec

#endif  // DIFFQEC_TENSOR_HPP
