// include/advasr/layers.h

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

#ifndef ADVASR_LAYERS_H_
#define ADVASR_LAYERS_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advasr/autodiff.h"

namespace advasr {

/// A named, persistent parameter tensor with its accumulated gradient.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor(value.shape())) {}

  void zero_grad() { std::fill(grad.values().begin(), grad.values().end(), 0.0); }
};

using ParamVisitor = std::function<void(Param &)>;

/// Binds persistent parameters to leaves of one computation graph.  A Tape
/// lives for a single forward/backward episode; after backward() the leaf
/// gradients are folded back into the Params.
class Tape {
 public:
  Var use(Param &p) {
    auto it = index_.find(&p);
    if (it != index_.end()) return bound_[it->second].second;
    Var leaf = make_leaf(p.value, "param");
    index_.emplace(&p, bound_.size());
    bound_.emplace_back(&p, leaf);
    return leaf;
  }

  /// Adds scale * d(root)/d(param) into every bound parameter's grad.
  void accumulate_param_grads(double scale = 1.0) {
    for (auto &[p, leaf] : bound_) {
      double *g = p->grad.data();
      const double *src = leaf->grad.data();
      for (int64_t i = 0; i < p->grad.numel(); ++i) g[i] += scale * src[i];
    }
  }

 private:
  std::vector<std::pair<Param *, Var>> bound_;
  std::unordered_map<const Param *, size_t> index_;
};

// Boolean frame validity; 1 = real frame, 0 = padding.  Masked frames are
// statically excluded from graphs, which makes padding invariance exact.
using Mask = std::vector<uint8_t>;

Mask all_valid(int64_t t);
int64_t mask_count(const Mask &m);
Mask subsample_mask(const Mask &m, int64_t factor);
/// True when every valid frame precedes every masked one (suffix padding).
bool mask_is_prefix(const Mask &m);
/// Number of leading valid frames of a prefix mask.
int64_t prefix_length(const Mask &m);

/// Uniform Glorot initialization in +-sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor &t, int64_t fan_in, int64_t fan_out, std::mt19937_64 &rng);

enum class LayerKind {
  kRecurrent,
  kBidirectionalRecurrent,
  kLinear,
  kSubsample,
  kStatsPool,
};

struct LayerSpec {
  LayerKind kind = LayerKind::kLinear;
  int64_t input_dim = 0;
  int64_t output_dim = 0;
  int64_t factor = 1;  // subsample only
};

struct Linear {
  Param weight;  // in x out
  Param bias;    // 1 x out

  Linear() = default;
  Linear(const std::string &prefix, int64_t in, int64_t out, std::mt19937_64 &rng);

  Var apply(Tape &tape, const Var &x);
  void visit(const ParamVisitor &fn);
  int64_t input_dim() const { return weight.value.rows(); }
  int64_t output_dim() const { return weight.value.cols(); }
};

/// Gated recurrent cell with update/reset/candidate gates.
struct GruCell {
  Param wz, uz, bz;
  Param wr, ur, br;
  Param wn, un, bn;
  int64_t input_dim = 0, hidden_dim = 0;

  GruCell() = default;
  GruCell(const std::string &prefix, int64_t in, int64_t hidden, std::mt19937_64 &rng);

  /// One step: x is [1 x in], h_prev is [1 x hidden]; returns [1 x hidden].
  Var step(Tape &tape, const Var &x, const Var &h_prev);
  void visit(const ParamVisitor &fn);
};

/// Unidirectional recurrent layer over a [T x in] sequence.  Masked frames
/// produce zero output rows and leave the hidden state untouched.
struct GruLayer {
  GruCell cell;

  GruLayer() = default;
  GruLayer(const std::string &prefix, int64_t in, int64_t hidden, std::mt19937_64 &rng);

  Var apply(Tape &tape, const Var &seq, const Mask &mask, bool reverse = false);
  void visit(const ParamVisitor &fn);
};

/// Bidirectional recurrent layer; output is [T x 2*hidden], the forward and
/// backward passes concatenated per frame.
struct BiGruLayer {
  GruLayer fwd, bwd;
  int64_t input_dim = 0, hidden_dim = 0;

  BiGruLayer() = default;
  BiGruLayer(const std::string &prefix, int64_t in, int64_t hidden, std::mt19937_64 &rng);

  Var apply(Tape &tape, const Var &seq, const Mask &mask);
  void visit(const ParamVisitor &fn);
};

/// Spec-driven recurrent forward used by contract tests: builds the masked
/// (bi)directional pass for an existing cell bundle.
Var recurrent_forward(const LayerSpec &spec, GruLayer &fw, GruLayer *bw,
                      Tape &tape, const Var &seq, const Mask &mask);

/// Keeps frames 0, s, 2s, ... of a [T x D] sequence (and of its mask).
Var subsample(const Var &seq, int64_t factor);
Tensor subsample(const Tensor &seq, int64_t factor);

/// Concatenated per-dimension mean and population stddev over valid frames;
/// output is [1 x 2D].  stddev uses epsilon 1e-8 under the square root.
Var stats_pool(const Var &frames, const Mask &mask);

}  // namespace advasr

#endif  // ADVASR_LAYERS_H_
