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

#include <cmath>
#include <limits>

#include "diffqec/rng.hpp"
#include "diffqec/tape.hpp"
#include "doctest.h"

using namespace diffqec;

namespace {

Parameter make_param(const std::string& name, Shape shape, Rng& rng, double scale = 0.5) {
  Parameter p(name, shape);
  for (double& v : p.value) v = (2.0 * rng.uniform01() - 1.0) * scale;
  return p;
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("sum(W) has all-ones gradient") {
  Rng rng(1);
  Parameter w = make_param("w", Shape{3, 4}, rng);
  Tape tape;
  int wid = tape.param(w, 0);
  int loss = tape.sum(wid);
  tape.backward(loss);
  for (double g : tape.grad(wid)) CHECK(g == 1.0);
}

TEST_CASE("sum(W*W) has gradient 2W") {
  Rng rng(2);
  Parameter w = make_param("w", Shape{2, 5}, rng);
  Tape tape;
  int wid = tape.param(w, 0);
  int loss = tape.sum(tape.mul(wid, wid));
  tape.backward(loss);
  const auto& g = tape.grad(wid);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(g[i] == doctest::Approx(2.0 * w.value[i]).epsilon(1e-14));
}

TEST_CASE("linear matches a straight-line matmul") {
  Tape tape;
  Tensor x(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor w(Shape{2, 3}, {0.5, -1, 2, 1, 1, 1});
  Tensor b(Shape{2}, {10, -10});
  int y = tape.linear(tape.leaf(x), tape.leaf(w), tape.leaf(b));
  // Row 0: [1,2,3].[0.5,-1,2] + 10 = 14.5; [1,2,3].[1,1,1] - 10 = -4.
  // Row 1: [4,5,6].[0.5,-1,2] + 10 = 19;   [4,5,6].[1,1,1] - 10 = 5.
  const auto& v = tape.value(y).v;
  CHECK(v[0] == doctest::Approx(14.5));
  CHECK(v[1] == doctest::Approx(-4.0));
  CHECK(v[2] == doctest::Approx(19.0));
  CHECK(v[3] == doctest::Approx(5.0));
}

TEST_CASE("conv2d matches a hand-rolled reference on a fixed case") {
  // 1x1x3x3 input, 1x1x3x3 kernel, pad 1.
  Tensor x(Shape{1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor w(Shape{1, 1, 3, 3}, {0, 1, 0, 1, -4, 1, 0, 1, 0});  // Laplacian stencil
  Tensor b(Shape{1}, {0.25});
  Tape tape;
  int y = tape.conv2d(tape.leaf(x), tape.leaf(w), tape.leaf(b), 1);

  // Independent reference: explicit loops, zero padding.
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i > 2 || j < 0 || j > 2) return 0.0;
    return x.v[static_cast<std::size_t>(i * 3 + j)];
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double expect = 0.25 + at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j);
      CHECK(tape.value(y).v[static_cast<std::size_t>(i * 3 + j)] == doctest::Approx(expect).epsilon(1e-14));
    }
  }
}

TEST_CASE("softmax cross-entropy: known values") {
  Tape tape;
  // Uniform logits -> ln 2 per bit.
  Tensor uniform(Shape{2, 4}, std::vector<double>(8, 0.0));
  int loss = tape.softmax_xent_mean(tape.leaf(uniform), {0, 1, 1, 0}, 2);
  CHECK(tape.value(loss).v[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  // Confident correct logits -> loss ~ 0.
  Tape tape2;
  Tensor sharp(Shape{1, 2}, {20.0, -20.0});
  int loss2 = tape2.softmax_xent_mean(tape2.leaf(sharp), {0}, 1);
  CHECK(tape2.value(loss2).v[0] < 1e-8);
  CHECK(tape2.value(loss2).v[0] >= 0.0);
}

TEST_CASE("margin_sum value and gradient") {
  Rng rng(3);
  Parameter logits = make_param("l", Shape{1, 4}, rng, 1.0);
  Tape tape;
  int lid = tape.param(logits, 0);
  int f = tape.margin_sum(lid, {1, 0});
  double expect = (logits.value[1] - logits.value[0]) + (logits.value[2] - logits.value[3]);
  CHECK(tape.value(f).v[0] == doctest::Approx(expect).epsilon(1e-14));
  tape.backward(f);
  const auto& g = tape.grad(lid);
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 1.0);
  CHECK(g[2] == 1.0);
  CHECK(g[3] == -1.0);
}

TEST_CASE("elementwise ops, pooling, and slicing against finite differences") {
  Rng rng(4);
  Parameter a = make_param("a", Shape{2, 2, 2, 2}, rng, 0.8);

  auto eval = [](const Parameter& pa, std::vector<double>* grad_out) {
    Tape tape;
    int aid = tape.param(pa, 0);
    int act = tape.tanh_op(tape.sigmoid(tape.relu(tape.scale_add(aid, 1.5, -0.1))));
    int pooled = tape.global_avg_pool(act);      // [2,2]
    int s1 = tape.slice_rows(pooled, 1, 1);
    int s0 = tape.slice_rows(pooled, 0, 1);
    int joined = tape.add(tape.mul(s1, s1), tape.sub(s0, s1));
    int loss = tape.sum(joined);
    double v = tape.value(loss).v[0];
    if (grad_out != nullptr) {
      tape.backward(loss);
      *grad_out = tape.grad(aid);
    }
    return v;
  };

  std::vector<double> grads;
  eval(a, &grads);
  REQUIRE(grads.size() == a.size());
  const double h = 1e-6;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Parameter plus = a, minus = a;
    plus.value[i] += h;
    minus.value[i] -= h;
    double fd = (eval(plus, nullptr) - eval(minus, nullptr)) / (2.0 * h);
    CHECK(std::abs(grads[i] - fd) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(grads[i])}));
  }
}

TEST_CASE("backward rejects non-scalar roots and non-finite values") {
  Tape tape;
  Tensor x(Shape{2}, {1.0, 2.0});
  int xid = tape.leaf(x, true);
  CHECK_THROWS_AS(tape.backward(xid), std::invalid_argument);

  Tape tape2;
  Tensor big(Shape{1, 1}, {1e308});
  int a = tape2.leaf(big, true);
  CHECK_THROWS_AS(tape2.mul(a, a), std::runtime_error);  // overflow to inf
}

TEST_CASE("grad access before backward is rejected") {
  Tape tape;
  Tensor x(Shape{1}, {2.0});
  int xid = tape.leaf(x, true);
  CHECK_THROWS_AS(tape.grad(xid), std::logic_error);
}

}  // TEST_SUITE
