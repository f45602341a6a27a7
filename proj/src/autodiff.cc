// src/autodiff.cc

// Copyright 2026  The advasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "advasr/autodiff.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace advasr {

namespace {

Var new_node(const char *op, std::vector<Var> inputs, Tensor value) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->inputs = std::move(inputs);
  n->grad = Tensor(value.shape());
  n->value = std::move(value);
  return n;
}

void require_same_shape(const char *op, const Var &a, const Var &b) {
  if (!a->value.same_shape(b->value))
    throw ShapeError(str_cat(op, ": shape mismatch ", a->value.shape_str(),
                             " vs ", b->value.shape_str()));
}

// True when b is [1 x n] against a's [m x n].
bool row_broadcast(const Var &a, const Var &b) {
  return a->value.shape().size() == 2 && a->rows() > 1 && b->rows() == 1 &&
         a->cols() == b->value.numel();
}

void axpy(double alpha, const Tensor &x, Tensor &y) {
  const double *xs = x.data();
  double *ys = y.data();
  int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) ys[i] += alpha * xs[i];
}

}  // namespace

Var make_leaf(Tensor value, const char *tag) {
  return new_node(tag, {}, std::move(value));
}

Var make_const(Tensor value) { return new_node("const", {}, std::move(value)); }

Var add(const Var &a, const Var &b) {
  bool bcast = row_broadcast(a, b);
  if (!bcast) require_same_shape("add", a, b);
  Tensor out = a->value;
  int64_t m = a->rows(), n = a->cols();
  if (bcast) {
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) out[i * n + j] += b->value[j];
  } else {
    axpy(1.0, b->value, out);
  }
  auto node = new_node("add", {a, b}, std::move(out));
  node->backprop = [bcast, m, n](Node &self) {
    axpy(1.0, self.grad, self.inputs[0]->grad);
    if (bcast) {
      Tensor &gb = self.inputs[1]->grad;
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) gb[j] += self.grad[i * n + j];
    } else {
      axpy(1.0, self.grad, self.inputs[1]->grad);
    }
  };
  return node;
}

Var mul(const Var &a, const Var &b) {
  bool bcast = row_broadcast(a, b);
  if (!bcast) require_same_shape("multiply", a, b);
  Tensor out = a->value;
  int64_t m = a->rows(), n = a->cols();
  if (bcast) {
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) out[i * n + j] *= b->value[j];
  } else {
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
  }
  auto node = new_node("multiply", {a, b}, std::move(out));
  node->backprop = [bcast, m, n](Node &self) {
    const Tensor &av = self.inputs[0]->value;
    const Tensor &bv = self.inputs[1]->value;
    Tensor &ga = self.inputs[0]->grad;
    Tensor &gb = self.inputs[1]->grad;
    if (bcast) {
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
          ga[i * n + j] += self.grad[i * n + j] * bv[j];
          gb[j] += self.grad[i * n + j] * av[i * n + j];
        }
    } else {
      for (int64_t i = 0; i < self.grad.numel(); ++i) {
        ga[i] += self.grad[i] * bv[i];
        gb[i] += self.grad[i] * av[i];
      }
    }
  };
  return node;
}

Var sub(const Var &a, const Var &b) { return add(a, neg(b)); }

Var scale(const Var &x, double c) {
  Tensor out = x->value;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= c;
  auto node = new_node("scale", {x}, std::move(out));
  node->backprop = [c](Node &self) { axpy(c, self.grad, self.inputs[0]->grad); };
  return node;
}

Var add_scalar(const Var &x, double c) {
  Tensor out = x->value;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += c;
  auto node = new_node("add_scalar", {x}, std::move(out));
  node->backprop = [](Node &self) { axpy(1.0, self.grad, self.inputs[0]->grad); };
  return node;
}

Var neg(const Var &x) { return scale(x, -1.0); }

Var matmul(const Var &a, const Var &b) {
  if (a->value.shape().size() != 2 || b->value.shape().size() != 2 ||
      a->cols() != b->rows())
    throw ShapeError(str_cat("matmul: incompatible shapes ",
                             a->value.shape_str(), " vs ", b->value.shape_str()));
  int64_t m = a->rows(), k = a->cols(), n = b->cols();
  Tensor out({m, n});
  const double *A = a->value.data();
  const double *B = b->value.data();
  double *C = out.data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t p = 0; p < k; ++p) {
      double av = A[i * k + p];
      if (av == 0.0) continue;
      const double *brow = B + p * n;
      double *crow = C + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  auto node = new_node("matmul", {a, b}, std::move(out));
  node->backprop = [m, k, n](Node &self) {
    const double *G = self.grad.data();
    const double *A = self.inputs[0]->value.data();
    const double *B = self.inputs[1]->value.data();
    double *GA = self.inputs[0]->grad.data();
    double *GB = self.inputs[1]->grad.data();
    // dA += G * B^T
    for (int64_t i = 0; i < m; ++i)
      for (int64_t p = 0; p < k; ++p) {
        double acc = 0.0;
        const double *grow = G + i * n;
        const double *brow = B + p * n;
        for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
        GA[i * k + p] += acc;
      }
    // dB += A^T * G
    for (int64_t i = 0; i < m; ++i)
      for (int64_t p = 0; p < k; ++p) {
        double av = A[i * k + p];
        if (av == 0.0) continue;
        const double *grow = G + i * n;
        double *gbrow = GB + p * n;
        for (int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
      }
  };
  return node;
}

Var transpose(const Var &x) {
  if (x->value.shape().size() != 2)
    throw ShapeError("transpose: rank-2 tensor required, got " +
                     x->value.shape_str());
  int64_t m = x->rows(), n = x->cols();
  Tensor out({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out[j * m + i] = x->value[i * n + j];
  auto node = new_node("transpose", {x}, std::move(out));
  node->backprop = [m, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) gx[i * n + j] += self.grad[j * m + i];
  };
  return node;
}

namespace {
template <typename Fwd, typename Bwd>
Var unary_elementwise(const char *op, const Var &x, Fwd fwd, Bwd dfdy) {
  Tensor out = x->value;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = fwd(out[i]);
  auto node = new_node(op, {x}, std::move(out));
  node->backprop = [dfdy](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    const Tensor &xv = self.inputs[0]->value;
    for (int64_t i = 0; i < self.grad.numel(); ++i)
      gx[i] += self.grad[i] * dfdy(xv[i], self.value[i]);
  };
  return node;
}
}  // namespace

Var tanh(const Var &x) {
  return unary_elementwise(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var &x) {
  return unary_elementwise(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(const Var &x) {
  return unary_elementwise(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double xv, double) { return xv > 0.0 ? 1.0 : 0.0; });
}

Var sqrt(const Var &x) {
  return unary_elementwise(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Var softmax_rows(const Var &x) {
  int64_t m = x->rows(), n = x->cols();
  Tensor out = x->value;
  for (int64_t i = 0; i < m; ++i) {
    double *r = out.data() + i * n;
    double mx = *std::max_element(r, r + n);
    double z = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      r[j] = std::exp(r[j] - mx);
      z += r[j];
    }
    for (int64_t j = 0; j < n; ++j) r[j] /= z;
  }
  auto node = new_node("softmax", {x}, std::move(out));
  node->backprop = [m, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < m; ++i) {
      const double *y = self.value.data() + i * n;
      const double *g = self.grad.data() + i * n;
      double dot = 0.0;
      for (int64_t j = 0; j < n; ++j) dot += g[j] * y[j];
      for (int64_t j = 0; j < n; ++j) gx[i * n + j] += y[j] * (g[j] - dot);
    }
  };
  return node;
}

Var log_softmax_rows(const Var &x) {
  int64_t m = x->rows(), n = x->cols();
  Tensor out = x->value;
  for (int64_t i = 0; i < m; ++i) {
    double *r = out.data() + i * n;
    double mx = *std::max_element(r, r + n);
    double z = 0.0;
    for (int64_t j = 0; j < n; ++j) z += std::exp(r[j] - mx);
    double lse = mx + std::log(z);
    for (int64_t j = 0; j < n; ++j) r[j] -= lse;
  }
  auto node = new_node("log_softmax", {x}, std::move(out));
  node->backprop = [m, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < m; ++i) {
      const double *y = self.value.data() + i * n;
      const double *g = self.grad.data() + i * n;
      double gsum = 0.0;
      for (int64_t j = 0; j < n; ++j) gsum += g[j];
      for (int64_t j = 0; j < n; ++j)
        gx[i * n + j] += g[j] - std::exp(y[j]) * gsum;
    }
  };
  return node;
}

Var logsumexp(const Var &x, int axis) {
  int64_t m = x->rows(), n = x->cols();
  if (axis != -1 && axis != 0 && axis != 1)
    throw ShapeError(str_cat("logsumexp: bad axis ", axis));
  auto lse_span = [](const double *v, int64_t cnt, int64_t stride) {
    double mx = v[0];
    for (int64_t i = 1; i < cnt; ++i) mx = std::max(mx, v[i * stride]);
    double z = 0.0;
    for (int64_t i = 0; i < cnt; ++i) z += std::exp(v[i * stride] - mx);
    return mx + std::log(z);
  };
  Tensor out;
  if (axis == -1) {
    out = Tensor({1});
    out[0] = lse_span(x->value.data(), x->value.numel(), 1);
  } else if (axis == 0) {
    out = Tensor({1, n});
    for (int64_t j = 0; j < n; ++j) out[j] = lse_span(x->value.data() + j, m, n);
  } else {
    out = Tensor({m, 1});
    for (int64_t i = 0; i < m; ++i)
      out[i] = lse_span(x->value.data() + i * n, n, 1);
  }
  auto node = new_node("logsumexp", {x}, std::move(out));
  node->backprop = [axis, m, n](Node &self) {
    const Tensor &xv = self.inputs[0]->value;
    Tensor &gx = self.inputs[0]->grad;
    if (axis == -1) {
      double g = self.grad[0], lse = self.value[0];
      for (int64_t i = 0; i < xv.numel(); ++i)
        gx[i] += g * std::exp(xv[i] - lse);
    } else if (axis == 0) {
      for (int64_t j = 0; j < n; ++j)
        for (int64_t i = 0; i < m; ++i)
          gx[i * n + j] += self.grad[j] * std::exp(xv[i * n + j] - self.value[j]);
    } else {
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j)
          gx[i * n + j] += self.grad[i] * std::exp(xv[i * n + j] - self.value[i]);
    }
  };
  return node;
}

Var concat(const std::vector<Var> &parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError(str_cat("concat: bad axis ", axis));
  for (const auto &p : parts)
    if (p->value.shape().size() != 2)
      throw ShapeError("concat: rank-2 tensors required, got " +
                       p->value.shape_str());
  int64_t m = parts[0]->rows(), n = parts[0]->cols();
  int64_t total = 0;
  for (const auto &p : parts) {
    if (axis == 0 && p->cols() != n)
      throw ShapeError(str_cat("concat axis 0: column mismatch ", n, " vs ",
                               p->cols()));
    if (axis == 1 && p->rows() != m)
      throw ShapeError(str_cat("concat axis 1: row mismatch ", m, " vs ",
                               p->rows()));
    total += (axis == 0) ? p->rows() : p->cols();
  }
  Tensor out(axis == 0 ? std::vector<int64_t>{total, n}
                       : std::vector<int64_t>{m, total});
  if (axis == 0) {
    int64_t r = 0;
    for (const auto &p : parts) {
      std::copy(p->value.data(), p->value.data() + p->value.numel(),
                out.data() + r * n);
      r += p->rows();
    }
  } else {
    int64_t c = 0;
    for (const auto &p : parts) {
      int64_t pc = p->cols();
      for (int64_t i = 0; i < m; ++i)
        std::copy(p->value.data() + i * pc, p->value.data() + (i + 1) * pc,
                  out.data() + i * total + c);
      c += pc;
    }
  }
  auto node = new_node("concat", std::vector<Var>(parts), std::move(out));
  node->backprop = [axis, m, total](Node &self) {
    if (axis == 0) {
      int64_t n2 = self.cols();
      int64_t r = 0;
      for (auto &p : self.inputs) {
        axpy(1.0, Tensor({p->rows(), n2},
                         std::vector<double>(self.grad.data() + r * n2,
                                             self.grad.data() + (r + p->rows()) * n2)),
             p->grad);
        r += p->rows();
      }
    } else {
      int64_t c = 0;
      for (auto &p : self.inputs) {
        int64_t pc = p->cols();
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < pc; ++j)
            p->grad[i * pc + j] += self.grad[i * total + c + j];
        c += pc;
      }
    }
  };
  return node;
}

Var stack_scalars(const std::vector<Var> &scalars) {
  if (scalars.empty()) throw ShapeError("stack_scalars: no inputs");
  Tensor out({static_cast<int64_t>(scalars.size()), 1});
  for (size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i]->value.numel() != 1)
      throw ShapeError("stack_scalars: non-scalar input " +
                       scalars[i]->value.shape_str());
    out[static_cast<int64_t>(i)] = scalars[i]->value[0];
  }
  auto node = new_node("stack", std::vector<Var>(scalars), std::move(out));
  node->backprop = [](Node &self) {
    for (size_t i = 0; i < self.inputs.size(); ++i)
      self.inputs[i]->grad[0] += self.grad[static_cast<int64_t>(i)];
  };
  return node;
}

Var slice_rows(const Var &x, int64_t r0, int64_t r1) {
  int64_t m = x->rows(), n = x->cols();
  if (r0 < 0 || r1 > m || r0 >= r1)
    throw ShapeError(str_cat("slice: rows [", r0, ",", r1, ") out of ",
                             x->value.shape_str()));
  Tensor out({r1 - r0, n},
             std::vector<double>(x->value.data() + r0 * n,
                                 x->value.data() + r1 * n));
  auto node = new_node("slice", {x}, std::move(out));
  node->backprop = [r0, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < self.grad.numel(); ++i) gx[r0 * n + i] += self.grad[i];
  };
  return node;
}

Var slice_cols(const Var &x, int64_t c0, int64_t c1) {
  int64_t m = x->rows(), n = x->cols();
  if (c0 < 0 || c1 > n || c0 >= c1)
    throw ShapeError(str_cat("slice: cols [", c0, ",", c1, ") out of ",
                             x->value.shape_str()));
  Tensor out({m, c1 - c0});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = c0; j < c1; ++j) out[i * (c1 - c0) + (j - c0)] = x->value[i * n + j];
  auto node = new_node("slice", {x}, std::move(out));
  node->backprop = [c0, c1, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    int64_t w = c1 - c0;
    for (int64_t i = 0; i < self.rows(); ++i)
      for (int64_t j = 0; j < w; ++j) gx[i * n + c0 + j] += self.grad[i * w + j];
  };
  return node;
}

Var pick(const Var &x, int64_t r, int64_t c) {
  int64_t m = x->rows(), n = x->cols();
  if (r < 0 || r >= m || c < 0 || c >= n)
    throw ShapeError(str_cat("pick: (", r, ",", c, ") out of ",
                             x->value.shape_str()));
  Tensor out({1}, {x->value[r * n + c]});
  auto node = new_node("pick", {x}, std::move(out));
  node->backprop = [r, c, n](Node &self) {
    self.inputs[0]->grad[r * n + c] += self.grad[0];
  };
  return node;
}

Var subsample_rows(const Var &x, int64_t s) {
  if (s < 1) throw ShapeError(str_cat("subsample: factor ", s, " < 1"));
  int64_t m = x->rows(), n = x->cols();
  if (m == 0) throw ShapeError("subsample: empty input");
  int64_t keep = (m + s - 1) / s;
  Tensor out({keep, n});
  for (int64_t i = 0; i < keep; ++i)
    std::copy(x->value.data() + i * s * n, x->value.data() + (i * s + 1) * n,
              out.data() + i * n);
  auto node = new_node("subsample", {x}, std::move(out));
  node->backprop = [s, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < self.rows(); ++i)
      for (int64_t j = 0; j < n; ++j) gx[i * s * n + j] += self.grad[i * n + j];
  };
  return node;
}

Var sum(const Var &x) {
  double acc = 0.0;
  for (int64_t i = 0; i < x->value.numel(); ++i) acc += x->value[i];
  auto node = new_node("sum", {x}, Tensor::scalar(acc));
  node->backprop = [](Node &self) {
    axpy(self.grad[0], Tensor::full(self.inputs[0]->value.shape(), 1.0),
         self.inputs[0]->grad);
  };
  return node;
}

Var mean(const Var &x) {
  int64_t n = x->value.numel();
  if (n == 0) throw ShapeError("mean: empty input");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var sum_axis0(const Var &x) {
  int64_t m = x->rows(), n = x->cols();
  Tensor out({1, n});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out[j] += x->value[i * n + j];
  auto node = new_node("sum_axis0", {x}, std::move(out));
  node->backprop = [m, n](Node &self) {
    Tensor &gx = self.inputs[0]->grad;
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) gx[i * n + j] += self.grad[j];
  };
  return node;
}

Var embedding_lookup(const Var &table, const std::vector<int64_t> &ids) {
  int64_t v = table->rows(), d = table->cols();
  for (int64_t id : ids)
    if (id < 0 || id >= v)
      throw ShapeError(str_cat("embedding-lookup: id ", id, " out of [0,", v, ")"));
  int64_t n = static_cast<int64_t>(ids.size());
  Tensor out({n, d});
  for (int64_t i = 0; i < n; ++i)
    std::copy(table->value.data() + ids[i] * d,
              table->value.data() + (ids[i] + 1) * d, out.data() + i * d);
  auto node = new_node("embedding-lookup", {table}, std::move(out));
  node->backprop = [ids, d](Node &self) {
    Tensor &gt = self.inputs[0]->grad;
    for (size_t i = 0; i < ids.size(); ++i)
      for (int64_t j = 0; j < d; ++j)
        gt[ids[i] * d + j] += self.grad[static_cast<int64_t>(i) * d + j];
  };
  return node;
}

Var gradient_reversal(const Var &x, double alpha) {
  if (alpha < 0.0)
    throw NumericError(str_cat("gradient_reversal: alpha ", alpha, " < 0"));
  auto node = new_node("gradient-reversal", {x}, x->value);
  node->backprop = [alpha](Node &self) {
    axpy(-alpha, self.grad, self.inputs[0]->grad);
  };
  return node;
}

void backward(const Var &root) {
  if (!root) throw ShapeError("backward: null root");
  if (root->value.numel() != 1)
    throw ShapeError("backward: root must be scalar, got " +
                     root->value.shape_str());
  if (root->backward_ran)
    throw NumericError("backward: repeated call on the same root without reset");
  if (!std::isfinite(root->value[0]))
    throw NumericError("backward: non-finite root value");

  // Iterative post-order DFS: children (inputs) before consumers.
  std::vector<Node *> order;
  std::unordered_set<Node *> visited;
  std::vector<std::pair<Node *, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node *child = node->inputs[next++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) (*it)->backprop(**it);
  root->backward_ran = true;
}

double scalar_value(const Var &x) {
  if (x->value.numel() != 1)
    throw ShapeError("scalar_value: not a scalar, shape " + x->value.shape_str());
  return x->value[0];
}

double grad_check(const std::function<Var(const Var &)> &f, const Tensor &x,
                  double eps) {
  if (eps <= 0.0) throw NumericError("grad_check: eps must be positive");
  Var leaf = make_leaf(x, "gc-input");
  Var y = f(leaf);
  if (y->value.numel() != 1)
    throw ShapeError("grad_check: f must return a scalar");
  backward(y);
  Tensor analytic = leaf->grad;

  auto eval = [&f](Tensor t) {
    double v = scalar_value(f(make_leaf(std::move(t), "gc-input")));
    if (!std::isfinite(v))
      throw NumericError("grad_check: f non-finite at perturbed point");
    return v;
  };

  double max_err = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    Tensor hi = x, lo = x;
    hi[i] += eps;
    lo[i] -= eps;
    double num = (eval(std::move(hi)) - eval(std::move(lo))) / (2.0 * eps);
    double denom = std::max({std::fabs(analytic[i]), std::fabs(num), 1e-8});
    max_err = std::max(max_err, std::fabs(analytic[i] - num) / denom);
  }
  return max_err;
}

}  // namespace advasr
