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

#include "diffqec/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diffqec {

namespace {

// Four-accumulator dot product: keeps a fixed summation order (deterministic
// across thread counts) while leaving independent chains the compiler can
// vectorize under strict FP semantics.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

int Tape::push_entry(Tensor t, bool requires_grad, int param_id) {
  entries_.push_back(Entry{std::move(t), {}, requires_grad, param_id});
  return static_cast<int>(entries_.size()) - 1;
}

void Tape::check_finite(int id, const char* op_name) const {
  for (double x : entries_[static_cast<std::size_t>(id)].t.v) {
    if (!std::isfinite(x)) {
      throw std::runtime_error(std::string("non-finite value produced by op ") + op_name);
    }
  }
}

int Tape::leaf(Tensor t, bool requires_grad) {
  int id = push_entry(std::move(t), requires_grad);
  nodes_.push_back(Node{Op::kLeaf, -1, -1, -1, id});
  return id;
}

int Tape::zeros(Shape shape, bool requires_grad) { return leaf(Tensor(shape), requires_grad); }

int Tape::param(const Parameter& p, int param_id) {
  for (const auto& [obj, id] : param_entries_) {
    if (obj == &p) return id;
  }
  int id = push_entry(Tensor(p.shape, p.value), true, param_id);
  nodes_.push_back(Node{Op::kLeaf, -1, -1, -1, id});
  param_entries_.emplace_back(&p, id);
  return id;
}

int Tape::linear(int x, int w, int b) {
  const Tensor& tx = value(x);
  const Tensor& tw = value(w);
  if (tx.shape.ndim != 2 || tw.shape.ndim != 2 || tx.shape[1] != tw.shape[1]) {
    throw std::invalid_argument("linear: need x[N,I], w[O,I] with matching I");
  }
  const int n = tx.shape[0], in = tx.shape[1], out_dim = tw.shape[0];
  bool rg = entry(x).requires_grad || entry(w).requires_grad;
  const double* bias = nullptr;
  if (b >= 0) {
    const Tensor& tb = value(b);
    if (tb.shape.ndim != 1 || tb.shape[0] != out_dim) throw std::invalid_argument("linear: bad bias shape");
    bias = tb.v.data();
    rg = rg || entry(b).requires_grad;
  }
  Tensor y(Shape{n, out_dim});
  for (int i = 0; i < n; ++i) {
    const double* xr = tx.v.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(in);
    double* yr = y.v.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(out_dim);
    for (int o = 0; o < out_dim; ++o) {
      const double* wr = tw.v.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
      yr[o] = dot(xr, wr, static_cast<std::size_t>(in)) + (bias ? bias[o] : 0.0);
    }
  }
  int id = push_entry(std::move(y), rg);
  nodes_.push_back(Node{Op::kLinear, x, w, b, id});
  check_finite(id, "linear");
  return id;
}

int Tape::add(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw std::invalid_argument("add: shape mismatch");
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = ta.v[i] + tb.v[i];
  int id = push_entry(std::move(y), entry(a).requires_grad || entry(b).requires_grad);
  nodes_.push_back(Node{Op::kAdd, a, b, -1, id});
  check_finite(id, "add");
  return id;
}

int Tape::sub(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw std::invalid_argument("sub: shape mismatch");
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = ta.v[i] - tb.v[i];
  int id = push_entry(std::move(y), entry(a).requires_grad || entry(b).requires_grad);
  nodes_.push_back(Node{Op::kSub, a, b, -1, id});
  check_finite(id, "sub");
  return id;
}

int Tape::mul(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw std::invalid_argument("mul: shape mismatch");
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = ta.v[i] * tb.v[i];
  int id = push_entry(std::move(y), entry(a).requires_grad || entry(b).requires_grad);
  nodes_.push_back(Node{Op::kMul, a, b, -1, id});
  check_finite(id, "mul");
  return id;
}

int Tape::scale_add(int x, double scale, double shift) {
  const Tensor& tx = value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = scale * tx.v[i] + shift;
  int id = push_entry(std::move(y), entry(x).requires_grad);
  Node node{Op::kScaleAdd, x, -1, -1, id};
  node.s0 = scale;
  node.s1 = shift;
  nodes_.push_back(std::move(node));
  check_finite(id, "scale_add");
  return id;
}

int Tape::relu(int x) {
  const Tensor& tx = value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = tx.v[i] > 0.0 ? tx.v[i] : 0.0;
  int id = push_entry(std::move(y), entry(x).requires_grad);
  nodes_.push_back(Node{Op::kRelu, x, -1, -1, id});
  return id;
}

int Tape::sigmoid(int x) {
  const Tensor& tx = value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = 1.0 / (1.0 + std::exp(-tx.v[i]));
  int id = push_entry(std::move(y), entry(x).requires_grad);
  nodes_.push_back(Node{Op::kSigmoid, x, -1, -1, id});
  check_finite(id, "sigmoid");
  return id;
}

int Tape::tanh_op(int x) {
  const Tensor& tx = value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] = std::tanh(tx.v[i]);
  int id = push_entry(std::move(y), entry(x).requires_grad);
  nodes_.push_back(Node{Op::kTanh, x, -1, -1, id});
  return id;
}

int Tape::conv2d(int x, int w, int b, int pad) {
  const Tensor& tx = value(x);
  const Tensor& tw = value(w);
  const Tensor& tb = value(b);
  if (tx.shape.ndim != 4 || tw.shape.ndim != 4 || tx.shape[1] != tw.shape[1]) {
    throw std::invalid_argument("conv2d: need x[N,C,H,W], w[O,C,KH,KW]");
  }
  const int n = tx.shape[0], cin = tx.shape[1], h = tx.shape[2], wd = tx.shape[3];
  const int cout = tw.shape[0], kh = tw.shape[2], kw = tw.shape[3];
  if (tb.shape.ndim != 1 || tb.shape[0] != cout) throw std::invalid_argument("conv2d: bad bias shape");
  Tensor y(Shape{n, cout, h, wd});
  auto xat = [&](int ni, int ci, int yi, int xi) {
    return tx.v[((static_cast<std::size_t>(ni) * static_cast<std::size_t>(cin) +
                  static_cast<std::size_t>(ci)) *
                     static_cast<std::size_t>(h) +
                 static_cast<std::size_t>(yi)) *
                    static_cast<std::size_t>(wd) +
                static_cast<std::size_t>(xi)];
  };
  std::size_t oidx = 0;
  for (int ni = 0; ni < n; ++ni) {
    for (int o = 0; o < cout; ++o) {
      const double* wo = tw.v.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(cin) *
                                           static_cast<std::size_t>(kh) * static_cast<std::size_t>(kw);
      for (int yi = 0; yi < h; ++yi) {
        for (int xi = 0; xi < wd; ++xi) {
          double acc = tb.v[static_cast<std::size_t>(o)];
          for (int ci = 0; ci < cin; ++ci) {
            for (int ki = 0; ki < kh; ++ki) {
              int sy = yi + ki - pad;
              if (sy < 0 || sy >= h) continue;
              for (int kj = 0; kj < kw; ++kj) {
                int sx = xi + kj - pad;
                if (sx < 0 || sx >= wd) continue;
                acc += xat(ni, ci, sy, sx) *
                       wo[(static_cast<std::size_t>(ci) * static_cast<std::size_t>(kh) +
                           static_cast<std::size_t>(ki)) *
                              static_cast<std::size_t>(kw) +
                          static_cast<std::size_t>(kj)];
              }
            }
          }
          y.v[oidx++] = acc;
        }
      }
    }
  }
  bool rg = entry(x).requires_grad || entry(w).requires_grad || entry(b).requires_grad;
  int id = push_entry(std::move(y), rg);
  Node node{Op::kConv2d, x, w, b, id};
  node.i0 = pad;
  nodes_.push_back(std::move(node));
  check_finite(id, "conv2d");
  return id;
}

int Tape::global_avg_pool(int x) {
  const Tensor& tx = value(x);
  if (tx.shape.ndim != 4) throw std::invalid_argument("global_avg_pool: need x[N,C,H,W]");
  const int n = tx.shape[0], c = tx.shape[1], h = tx.shape[2], w = tx.shape[3];
  const double inv = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  Tensor y(Shape{n, c});
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < c; ++ci) {
      const double* base = tx.v.data() + (static_cast<std::size_t>(ni) * static_cast<std::size_t>(c) +
                                          static_cast<std::size_t>(ci)) *
                                             static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
      double acc = 0.0;
      for (int i = 0; i < h * w; ++i) acc += base[i];
      y.v[static_cast<std::size_t>(ni) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ci)] =
          acc * inv;
    }
  }
  int id = push_entry(std::move(y), entry(x).requires_grad);
  nodes_.push_back(Node{Op::kGlobalAvgPool, x, -1, -1, id});
  check_finite(id, "global_avg_pool");
  return id;
}

int Tape::slice_rows(int x, int begin, int count) {
  const Tensor& tx = value(x);
  if (tx.shape.ndim < 1) throw std::invalid_argument("slice_rows: scalar input");
  const int rows = tx.shape[0];
  if (begin < 0 || count < 0 || begin + count > rows) throw std::invalid_argument("slice_rows: range out of bounds");
  std::size_t row_len = tx.shape.numel() / static_cast<std::size_t>(rows == 0 ? 1 : rows);
  Shape out_shape = tx.shape;
  out_shape.dims[0] = count;
  Tensor y(out_shape);
  std::copy(tx.v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(begin) * row_len),
            tx.v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(begin + count) * row_len),
            y.v.begin());
  int id = push_entry(std::move(y), entry(x).requires_grad);
  Node node{Op::kSliceRows, x, -1, -1, id};
  node.i0 = begin;
  node.i1 = count;
  nodes_.push_back(std::move(node));
  return id;
}

int Tape::softmax_xent_mean(int logits, std::vector<std::uint8_t> targets, int pairs) {
  const Tensor& tl = value(logits);
  if (tl.shape.ndim != 2 || tl.shape[1] != 2 * pairs) {
    throw std::invalid_argument("softmax_xent_mean: need logits[N, 2*pairs]");
  }
  const int n = tl.shape[0];
  if (targets.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(pairs)) {
    throw std::invalid_argument("softmax_xent_mean: target count mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < pairs; ++p) {
      double l0 = tl.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                       static_cast<std::size_t>(2 * p)];
      double l1 = tl.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                       static_cast<std::size_t>(2 * p) + 1];
      double m = l0 > l1 ? l0 : l1;
      double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
      std::uint8_t target = targets[static_cast<std::size_t>(i) * static_cast<std::size_t>(pairs) +
                                    static_cast<std::size_t>(p)];
      total += lse - (target ? l1 : l0);
    }
  }
  Tensor y(Shape{1});
  y.v[0] = total / (static_cast<double>(n) * static_cast<double>(pairs));
  int id = push_entry(std::move(y), entry(logits).requires_grad);
  Node node{Op::kSoftmaxXentMean, logits, -1, -1, id};
  node.i0 = pairs;
  node.bits = std::move(targets);
  nodes_.push_back(std::move(node));
  check_finite(id, "softmax_xent_mean");
  return id;
}

int Tape::margin_sum(int logits, std::vector<std::uint8_t> chosen) {
  const Tensor& tl = value(logits);
  if (tl.shape.ndim != 2 || tl.shape[1] % 2 != 0) {
    throw std::invalid_argument("margin_sum: need logits[N, 2*pairs]");
  }
  const int n = tl.shape[0];
  const int pairs = tl.shape[1] / 2;
  if (chosen.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(pairs)) {
    throw std::invalid_argument("margin_sum: chosen count mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < pairs; ++p) {
      double l0 = tl.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                       static_cast<std::size_t>(2 * p)];
      double l1 = tl.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                       static_cast<std::size_t>(2 * p) + 1];
      std::uint8_t cls = chosen[static_cast<std::size_t>(i) * static_cast<std::size_t>(pairs) +
                                static_cast<std::size_t>(p)];
      total += cls ? (l1 - l0) : (l0 - l1);
    }
  }
  Tensor y(Shape{1});
  y.v[0] = total;
  int id = push_entry(std::move(y), entry(logits).requires_grad);
  Node node{Op::kMarginSum, logits, -1, -1, id};
  node.i0 = pairs;
  node.bits = std::move(chosen);
  nodes_.push_back(std::move(node));
  check_finite(id, "margin_sum");
  return id;
}

int Tape::sum(int x) {
  const Tensor& tx = value(x);
  Tensor y(Shape{1});
  double acc = 0.0;
  for (double v : tx.v) acc += v;
  y.v[0] = acc;
  int id = push_entry(std::move(y), entry(x).requires_grad);
  nodes_.push_back(Node{Op::kSum, x, -1, -1, id});
  check_finite(id, "sum");
  return id;
}

const std::vector<double>& Tape::grad(int id) const {
  const Entry& e = entries_[static_cast<std::size_t>(id)];
  if (!backward_done_ || e.g.empty()) {
    throw std::logic_error("Tape::grad: backward has not populated this entry");
  }
  return e.g;
}

void Tape::backward(int root) {
  const Tensor& r = value(root);
  if (r.shape.numel() != 1) throw std::invalid_argument("backward: root must be a scalar");
  if (!std::isfinite(r.v[0])) throw std::runtime_error("backward: root value is not finite");

  for (Entry& e : entries_) {
    if (e.requires_grad) e.g.assign(e.t.v.size(), 0.0);
  }
  entries_[static_cast<std::size_t>(root)].g.assign(1, 1.0);

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& node = *it;
    if (node.op == Op::kLeaf) continue;
    Entry& out = entry(node.out);
    if (!out.requires_grad || out.g.empty()) continue;
    const std::vector<double>& gy = out.g;

    auto gptr = [&](int id) -> std::vector<double>* {
      if (id < 0) return nullptr;
      Entry& e = entry(id);
      return e.requires_grad ? &e.g : nullptr;
    };

    switch (node.op) {
      case Op::kLeaf:
        break;
      case Op::kLinear: {
        const Tensor& tx = value(node.a);
        const Tensor& tw = value(node.b);
        const int n = tx.shape[0], in = tx.shape[1], out_dim = tw.shape[0];
        auto* gx = gptr(node.a);
        auto* gw = gptr(node.b);
        auto* gb = node.c >= 0 ? gptr(node.c) : nullptr;
        for (int i = 0; i < n; ++i) {
          const double* gyr = gy.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(out_dim);
          for (int o = 0; o < out_dim; ++o) {
            double g = gyr[o];
            if (g == 0.0) continue;
            if (gx) {
              axpy(g, tw.v.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in),
                   gx->data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(in),
                   static_cast<std::size_t>(in));
            }
            if (gw) {
              axpy(g, tx.v.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(in),
                   gw->data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in),
                   static_cast<std::size_t>(in));
            }
            if (gb) (*gb)[static_cast<std::size_t>(o)] += g;
          }
        }
        break;
      }
      case Op::kAdd: {
        if (auto* ga = gptr(node.a)) axpy(1.0, gy.data(), ga->data(), gy.size());
        if (auto* gb = gptr(node.b)) axpy(1.0, gy.data(), gb->data(), gy.size());
        break;
      }
      case Op::kSub: {
        if (auto* ga = gptr(node.a)) axpy(1.0, gy.data(), ga->data(), gy.size());
        if (auto* gb = gptr(node.b)) axpy(-1.0, gy.data(), gb->data(), gy.size());
        break;
      }
      case Op::kMul: {
        const Tensor& ta = value(node.a);
        const Tensor& tb = value(node.b);
        if (auto* ga = gptr(node.a)) {
          for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * tb.v[i];
        }
        if (auto* gb = gptr(node.b)) {
          for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] += gy[i] * ta.v[i];
        }
        break;
      }
      case Op::kScaleAdd: {
        if (auto* ga = gptr(node.a)) axpy(node.s0, gy.data(), ga->data(), gy.size());
        break;
      }
      case Op::kRelu: {
        const Tensor& ta = value(node.a);
        if (auto* ga = gptr(node.a)) {
          for (std::size_t i = 0; i < gy.size(); ++i) {
            if (ta.v[i] > 0.0) (*ga)[i] += gy[i];
          }
        }
        break;
      }
      case Op::kSigmoid: {
        const Tensor& ty = value(node.out);
        if (auto* ga = gptr(node.a)) {
          for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * ty.v[i] * (1.0 - ty.v[i]);
        }
        break;
      }
      case Op::kTanh: {
        const Tensor& ty = value(node.out);
        if (auto* ga = gptr(node.a)) {
          for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * (1.0 - ty.v[i] * ty.v[i]);
        }
        break;
      }
      case Op::kConv2d: {
        const Tensor& tx = value(node.a);
        const Tensor& tw = value(node.b);
        const int n = tx.shape[0], cin = tx.shape[1], h = tx.shape[2], wd = tx.shape[3];
        const int cout = tw.shape[0], kh = tw.shape[2], kw = tw.shape[3];
        const int pad = node.i0;
        auto* gx = gptr(node.a);
        auto* gw = gptr(node.b);
        auto* gb = gptr(node.c);
        auto xoff = [&](int ni, int ci, int yi, int xi) {
          return ((static_cast<std::size_t>(ni) * static_cast<std::size_t>(cin) +
                   static_cast<std::size_t>(ci)) *
                      static_cast<std::size_t>(h) +
                  static_cast<std::size_t>(yi)) *
                     static_cast<std::size_t>(wd) +
                 static_cast<std::size_t>(xi);
        };
        auto woff = [&](int o, int ci, int ki, int kj) {
          return ((static_cast<std::size_t>(o) * static_cast<std::size_t>(cin) +
                   static_cast<std::size_t>(ci)) *
                      static_cast<std::size_t>(kh) +
                  static_cast<std::size_t>(ki)) *
                     static_cast<std::size_t>(kw) +
                 static_cast<std::size_t>(kj);
        };
        std::size_t oidx = 0;
        for (int ni = 0; ni < n; ++ni) {
          for (int o = 0; o < cout; ++o) {
            for (int yi = 0; yi < h; ++yi) {
              for (int xi = 0; xi < wd; ++xi) {
                double g = gy[oidx++];
                if (g == 0.0) continue;
                if (gb) (*gb)[static_cast<std::size_t>(o)] += g;
                for (int ci = 0; ci < cin; ++ci) {
                  for (int ki = 0; ki < kh; ++ki) {
                    int sy = yi + ki - pad;
                    if (sy < 0 || sy >= h) continue;
                    for (int kj = 0; kj < kw; ++kj) {
                      int sx = xi + kj - pad;
                      if (sx < 0 || sx >= wd) continue;
                      if (gx) (*gx)[xoff(ni, ci, sy, sx)] += g * tw.v[woff(o, ci, ki, kj)];
                      if (gw) (*gw)[woff(o, ci, ki, kj)] += g * tx.v[xoff(ni, ci, sy, sx)];
                    }
                  }
                }
              }
            }
          }
        }
        break;
      }
      case Op::kGlobalAvgPool: {
        const Tensor& tx = value(node.a);
        const int n = tx.shape[0], c = tx.shape[1], h = tx.shape[2], w = tx.shape[3];
        const double inv = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
        if (auto* gx = gptr(node.a)) {
          for (int ni = 0; ni < n; ++ni) {
            for (int ci = 0; ci < c; ++ci) {
              double g = gy[static_cast<std::size_t>(ni) * static_cast<std::size_t>(c) +
                            static_cast<std::size_t>(ci)] *
                         inv;
              double* base = gx->data() + (static_cast<std::size_t>(ni) * static_cast<std::size_t>(c) +
                                           static_cast<std::size_t>(ci)) *
                                              static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
              for (int i = 0; i < h * w; ++i) base[i] += g;
            }
          }
        }
        break;
      }
      case Op::kSliceRows: {
        const Tensor& tx = value(node.a);
        const int rows = tx.shape[0];
        std::size_t row_len = tx.shape.numel() / static_cast<std::size_t>(rows == 0 ? 1 : rows);
        if (auto* gx = gptr(node.a)) {
          axpy(1.0, gy.data(), gx->data() + static_cast<std::size_t>(node.i0) * row_len, gy.size());
        }
        break;
      }
      case Op::kSoftmaxXentMean: {
        const Tensor& tl = value(node.a);
        const int n = tl.shape[0];
        const int pairs = node.i0;
        const double scale = gy[0] / (static_cast<double>(n) * static_cast<double>(pairs));
        if (auto* gl = gptr(node.a)) {
          for (int i = 0; i < n; ++i) {
            for (int p = 0; p < pairs; ++p) {
              std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                                 static_cast<std::size_t>(2 * p);
              double l0 = tl.v[base], l1 = tl.v[base + 1];
              double m = l0 > l1 ? l0 : l1;
              double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
              double z = e0 + e1;
              double p0 = e0 / z, p1 = e1 / z;
              std::uint8_t target = node.bits[static_cast<std::size_t>(i) * static_cast<std::size_t>(pairs) +
                                              static_cast<std::size_t>(p)];
              (*gl)[base] += scale * (p0 - (target ? 0.0 : 1.0));
              (*gl)[base + 1] += scale * (p1 - (target ? 1.0 : 0.0));
            }
          }
        }
        break;
      }
      case Op::kMarginSum: {
        const Tensor& tl = value(node.a);
        const int n = tl.shape[0];
        const int pairs = node.i0;
        const double g = gy[0];
        if (auto* gl = gptr(node.a)) {
          for (int i = 0; i < n; ++i) {
            for (int p = 0; p < pairs; ++p) {
              std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * pairs) +
                                 static_cast<std::size_t>(2 * p);
              std::uint8_t cls = node.bits[static_cast<std::size_t>(i) * static_cast<std::size_t>(pairs) +
                                           static_cast<std::size_t>(p)];
              (*gl)[base] += cls ? -g : g;
              (*gl)[base + 1] += cls ? g : -g;
            }
          }
        }
        break;
      }
      case Op::kSum: {
        if (auto* ga = gptr(node.a)) {
          for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += gy[0];
        }
        break;
      }
    }
  }
  backward_done_ = true;
}

void Tape::export_param_grads(std::vector<std::vector<double>>& sink) const {
  if (!backward_done_) throw std::logic_error("export_param_grads: run backward first");
  for (const auto& [obj, id] : param_entries_) {
    const Entry& e = entries_[static_cast<std::size_t>(id)];
    int pid = e.param_id;
    if (pid < 0 || static_cast<std::size_t>(pid) >= sink.size()) {
      throw std::logic_error("export_param_grads: param_id out of range");
    }
    std::vector<double>& dst = sink[static_cast<std::size_t>(pid)];
    if (dst.size() != e.g.size()) throw std::logic_error("export_param_grads: size mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += e.g[i];
  }
}

}  // namespace diffqec
