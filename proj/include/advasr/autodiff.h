// include/advasr/autodiff.h

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

#ifndef ADVASR_AUTODIFF_H_
#define ADVASR_AUTODIFF_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "advasr/tensor.h"

namespace advasr {

// Reverse-mode automatic differentiation over dense tensors.
//
// A computation is a DAG of Nodes built by the op constructors below.  Every
// node stores its forward value and a same-shaped gradient buffer that
// backward() fills by walking the graph once in reverse topological order.
// Gradient accumulation is additive, so shared subgraphs (one encoder output
// feeding several branches) receive the sum of all downstream contributions.
// Tensors inside one graph are confined to a single thread; distinct graphs
// may run concurrently.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  const char *op = "leaf";
  std::vector<Var> inputs;
  Tensor value;
  Tensor grad;  // same shape as value, zero until backward()
  std::function<void(Node &)> backprop;
  bool backward_ran = false;

  int64_t rows() const { return value.rows(); }
  int64_t cols() const { return value.cols(); }
};

/// Leaf node holding an input or parameter value.
Var make_leaf(Tensor value, const char *tag = "leaf");

/// Leaf node for data the graph treats as fixed (masks, one-hot targets).
Var make_const(Tensor value);

// Elementwise ops accept equal shapes, or a [1 x n] second operand that is
// broadcast over the rows of an [m x n] first operand.
Var add(const Var &a, const Var &b);
Var mul(const Var &a, const Var &b);
Var sub(const Var &a, const Var &b);
Var scale(const Var &x, double c);
Var add_scalar(const Var &x, double c);
Var neg(const Var &x);

Var matmul(const Var &a, const Var &b);
Var transpose(const Var &x);

Var tanh(const Var &x);
Var sigmoid(const Var &x);
Var relu(const Var &x);
Var sqrt(const Var &x);

/// Row-wise softmax / log-softmax over the last axis.
Var softmax_rows(const Var &x);
Var log_softmax_rows(const Var &x);

/// Log-sum-exp over the given axis: -1 whole tensor -> [1],
/// 0 columns -> [1 x n], 1 rows -> [m x 1].  Computed with a max shift.
Var logsumexp(const Var &x, int axis = -1);

Var concat(const std::vector<Var> &parts, int axis);
Var stack_scalars(const std::vector<Var> &scalars);  // k x 1
Var slice_rows(const Var &x, int64_t r0, int64_t r1);
Var slice_cols(const Var &x, int64_t c0, int64_t c1);
Var pick(const Var &x, int64_t r, int64_t c);  // scalar [1]
/// Keeps rows 0, s, 2s, ... (temporal decimation).
Var subsample_rows(const Var &x, int64_t s);

Var sum(const Var &x);        // [1]
Var mean(const Var &x);       // [1]
Var sum_axis0(const Var &x);  // [1 x n]

/// Rows of `table` selected by `ids`; gradients scatter back into the rows.
Var embedding_lookup(const Var &table, const std::vector<int64_t> &ids);

/// Identity in the forward pass; multiplies the upstream gradient by -alpha
/// in the backward pass.  alpha = 0 blocks the gradient entirely.
Var gradient_reversal(const Var &x, double alpha);

/// Accumulates d(root)/d(node.value) into grad over all reachable nodes.
/// root must be scalar; calling twice on the same root is an error.
void backward(const Var &root);

double scalar_value(const Var &x);

/// Max relative error between the analytic gradient of f at x and central
/// finite differences with step eps.  f must build a scalar graph from the
/// leaf it is given and be deterministic.
double grad_check(const std::function<Var(const Var &)> &f, const Tensor &x,
                  double eps = 1e-5);

}  // namespace advasr

#endif  // ADVASR_AUTODIFF_H_
