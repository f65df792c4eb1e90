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

#ifndef DIFFQEC_TAPE_HPP
#define DIFFQEC_TAPE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "diffqec/tensor.hpp"

namespace diffqec {

/// Reverse-mode autodiff over a recorded computation graph.
///
/// Every operation appends a node and an output tensor; `backward` walks the
/// tape in reverse, accumulating gradients for parameters and for leaves
/// created with requires_grad. Each forward pass uses a fresh Tape (or one
/// per thread); tapes are not thread-safe but are independent of each other,
/// so data-parallel shards can record concurrently against shared read-only
/// parameter values.
///
/// Supported ops: linear (matrix multiply + bias), 2D convolution, global
/// average pooling, elementwise add/sub/mul and scale-add, relu / sigmoid /
/// tanh, leading-dimension row slicing, softmax cross-entropy over logit
/// pairs, a gather-style margin reduction, and full summation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Constant or differentiable input.
  int leaf(Tensor t, bool requires_grad = false);
  int zeros(Shape shape, bool requires_grad = false);

  /// Parameter leaf. `param_id` keys gradient export; passing the same
  /// parameter object twice returns the same entry. The parameter's value
  /// is copied onto the tape, so subsequent optimizer updates do not
  /// invalidate a recorded graph.
  int param(const Parameter& p, int param_id);

  // x:[N,I] · w:[O,I]^T (+ b:[O]) -> [N,O]
  int linear(int x, int w, int b = -1);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  /// y = scale * x + shift, elementwise scalars.
  int scale_add(int x, double scale, double shift);
  int relu(int x);
  int sigmoid(int x);
  int tanh_op(int x);
  // x:[N,C,H,W], w:[O,C,KH,KW], b:[O]; stride 1, zero padding `pad`.
  int conv2d(int x, int w, int b, int pad);
  // [N,C,H,W] -> [N,C]
  int global_avg_pool(int x);
  // rows [begin, begin+count) of the leading dimension
  int slice_rows(int x, int begin, int count);
  /// logits:[N, 2*pairs]; targets: N*pairs bits. Mean two-class
  /// cross-entropy over all (row, pair) slots -> scalar.
  int softmax_xent_mean(int logits, std::vector<std::uint8_t> targets, int pairs);
  /// logits:[N, 2*pairs]; chosen: N*pairs class bits. Sum over slots of
  /// (logit[chosen] - logit[other]) -> scalar.
  int margin_sum(int logits, std::vector<std::uint8_t> chosen);
  int sum(int x);

  void backward(int root);

  const Tensor& value(int id) const { return entries_[static_cast<std::size_t>(id)].t; }
  /// Gradient of an entry; valid after backward for entries requiring grad.
  const std::vector<double>& grad(int id) const;

  /// Accumulates parameter gradients into `sink[param_id]` (resized vectors
  /// must already match parameter sizes).
  void export_param_grads(std::vector<std::vector<double>>& sink) const;

  std::size_t num_entries() const { return entries_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kLinear,
    kAdd,
    kSub,
    kMul,
    kScaleAdd,
    kRelu,
    kSigmoid,
    kTanh,
    kConv2d,
    kGlobalAvgPool,
    kSliceRows,
    kSoftmaxXentMean,
    kMarginSum,
    kSum,
  };

  struct Entry {
    Tensor t;
    std::vector<double> g;  // allocated lazily in backward
    bool requires_grad = false;
    int param_id = -1;
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    int out = -1;
    double s0 = 0.0, s1 = 0.0;
    int i0 = 0, i1 = 0;
    std::vector<std::uint8_t> bits;
  };

  int push_entry(Tensor t, bool requires_grad, int param_id = -1);
  void check_finite(int id, const char* op_name) const;
  const Entry& entry(int id) const { return entries_[static_cast<std::size_t>(id)]; }
  Entry& entry(int id) { return entries_[static_cast<std::size_t>(id)]; }

  std::vector<Entry> entries_;
  std::vector<Node> nodes_;
  std::vector<std::pair<const Parameter*, int>> param_entries_;  // (object, entry id)
  bool backward_done_ = false;
};

}  // namespace diffqec

#endif  // DIFFQEC_TAPE_HPP
