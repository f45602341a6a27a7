// src/layers.cc

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

#include "advasr/layers.h"

#include <cmath>

namespace advasr {

Mask all_valid(int64_t t) { return Mask(static_cast<size_t>(t), 1); }

int64_t mask_count(const Mask &m) {
  int64_t n = 0;
  for (uint8_t v : m) n += (v != 0);
  return n;
}

Mask subsample_mask(const Mask &m, int64_t factor) {
  if (factor < 1) throw ShapeError(str_cat("subsample: factor ", factor, " < 1"));
  Mask out;
  for (size_t i = 0; i < m.size(); i += static_cast<size_t>(factor))
    out.push_back(m[i]);
  return out;
}

bool mask_is_prefix(const Mask &m) {
  bool seen_pad = false;
  for (uint8_t v : m) {
    if (!v) seen_pad = true;
    else if (seen_pad) return false;
  }
  return true;
}

int64_t prefix_length(const Mask &m) {
  if (!mask_is_prefix(m))
    throw DataError("mask: suffix padding expected, got interior gaps");
  return mask_count(m);
}

void glorot_init(Tensor &t, int64_t fan_in, int64_t fan_out, std::mt19937_64 &rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
}

Linear::Linear(const std::string &prefix, int64_t in, int64_t out,
               std::mt19937_64 &rng)
    : weight(prefix + ".weight", Tensor({in, out})),
      bias(prefix + ".bias", Tensor({1, out})) {
  glorot_init(weight.value, in, out, rng);
}

Var Linear::apply(Tape &tape, const Var &x) {
  return add(matmul(x, tape.use(weight)), tape.use(bias));
}

void Linear::visit(const ParamVisitor &fn) {
  fn(weight);
  fn(bias);
}

GruCell::GruCell(const std::string &prefix, int64_t in, int64_t hidden,
                 std::mt19937_64 &rng)
    : wz(prefix + ".wz", Tensor({in, hidden})),
      uz(prefix + ".uz", Tensor({hidden, hidden})),
      bz(prefix + ".bz", Tensor({1, hidden})),
      wr(prefix + ".wr", Tensor({in, hidden})),
      ur(prefix + ".ur", Tensor({hidden, hidden})),
      br(prefix + ".br", Tensor({1, hidden})),
      wn(prefix + ".wn", Tensor({in, hidden})),
      un(prefix + ".un", Tensor({hidden, hidden})),
      bn(prefix + ".bn", Tensor({1, hidden})),
      input_dim(in),
      hidden_dim(hidden) {
  glorot_init(wz.value, in, hidden, rng);
  glorot_init(uz.value, hidden, hidden, rng);
  glorot_init(wr.value, in, hidden, rng);
  glorot_init(ur.value, hidden, hidden, rng);
  glorot_init(wn.value, in, hidden, rng);
  glorot_init(un.value, hidden, hidden, rng);
}

Var GruCell::step(Tape &tape, const Var &x, const Var &h_prev) {
  if (x->cols() != input_dim)
    throw ShapeError(str_cat("recurrent step: input dim ", x->cols(),
                             " != expected ", input_dim));
  Var z = sigmoid(add(add(matmul(x, tape.use(wz)), matmul(h_prev, tape.use(uz))),
                      tape.use(bz)));
  Var r = sigmoid(add(add(matmul(x, tape.use(wr)), matmul(h_prev, tape.use(ur))),
                      tape.use(br)));
  Var n = tanh(add(add(matmul(x, tape.use(wn)), mul(r, matmul(h_prev, tape.use(un)))),
                   tape.use(bn)));
  // h = (1 - z) * n + z * h_prev
  Var one_minus_z = add_scalar(neg(z), 1.0);
  return add(mul(one_minus_z, n), mul(z, h_prev));
}

void GruCell::visit(const ParamVisitor &fn) {
  fn(wz); fn(uz); fn(bz);
  fn(wr); fn(ur); fn(br);
  fn(wn); fn(un); fn(bn);
}

GruLayer::GruLayer(const std::string &prefix, int64_t in, int64_t hidden,
                   std::mt19937_64 &rng)
    : cell(prefix, in, hidden, rng) {}

Var GruLayer::apply(Tape &tape, const Var &seq, const Mask &mask, bool reverse) {
  int64_t t_len = seq->rows();
  if (static_cast<int64_t>(mask.size()) != t_len)
    throw ShapeError(str_cat("recurrent: mask length ", mask.size(),
                             " != sequence length ", t_len));
  if (t_len == 0) throw ShapeError("recurrent: empty sequence");

  Var zero_row = make_const(Tensor({1, cell.hidden_dim}));
  Var h = zero_row;
  std::vector<Var> out(static_cast<size_t>(t_len));
  for (int64_t i = 0; i < t_len; ++i) {
    int64_t t = reverse ? t_len - 1 - i : i;
    if (!mask[static_cast<size_t>(t)]) {
      // Padding: zero output, state passes over the frame untouched.
      out[static_cast<size_t>(t)] = zero_row;
      continue;
    }
    h = cell.step(tape, slice_rows(seq, t, t + 1), h);
    out[static_cast<size_t>(t)] = h;
  }
  return concat(out, 0);
}

void GruLayer::visit(const ParamVisitor &fn) { cell.visit(fn); }

BiGruLayer::BiGruLayer(const std::string &prefix, int64_t in, int64_t hidden,
                       std::mt19937_64 &rng)
    : fwd(prefix + ".fwd", in, hidden, rng),
      bwd(prefix + ".bwd", in, hidden, rng),
      input_dim(in),
      hidden_dim(hidden) {}

Var BiGruLayer::apply(Tape &tape, const Var &seq, const Mask &mask) {
  Var f = fwd.apply(tape, seq, mask, /*reverse=*/false);
  Var b = bwd.apply(tape, seq, mask, /*reverse=*/true);
  return concat({f, b}, 1);
}

void BiGruLayer::visit(const ParamVisitor &fn) {
  fwd.visit(fn);
  bwd.visit(fn);
}

Var recurrent_forward(const LayerSpec &spec, GruLayer &fw, GruLayer *bw,
                      Tape &tape, const Var &seq, const Mask &mask) {
  if (seq->cols() != spec.input_dim)
    throw ShapeError(str_cat("recurrent_forward: input dim ", seq->cols(),
                             " != spec ", spec.input_dim));
  if (spec.kind == LayerKind::kRecurrent) return fw.apply(tape, seq, mask);
  if (spec.kind != LayerKind::kBidirectionalRecurrent || bw == nullptr)
    throw ShapeError("recurrent_forward: spec kind is not recurrent");
  Var f = fw.apply(tape, seq, mask);
  Var b = bw->apply(tape, seq, mask, /*reverse=*/true);
  return concat({f, b}, 1);
}

Var subsample(const Var &seq, int64_t factor) { return subsample_rows(seq, factor); }

Tensor subsample(const Tensor &seq, int64_t factor) {
  if (factor < 1) throw ShapeError(str_cat("subsample: factor ", factor, " < 1"));
  int64_t t_len = seq.rows(), d = seq.cols();
  if (t_len == 0) throw ShapeError("subsample: empty input");
  int64_t keep = (t_len + factor - 1) / factor;
  Tensor out({keep, d});
  for (int64_t i = 0; i < keep; ++i)
    std::copy(seq.data() + i * factor * d, seq.data() + (i * factor + 1) * d,
              out.data() + i * d);
  return out;
}

Var stats_pool(const Var &frames, const Mask &mask) {
  int64_t t_len = frames->rows();
  if (static_cast<int64_t>(mask.size()) != t_len)
    throw ShapeError(str_cat("stats_pool: mask length ", mask.size(),
                             " != frame count ", t_len));
  int64_t n = mask_count(mask);
  if (n == 0) throw ShapeError("stats_pool: all frames masked");

  Var valid;
  if (n == t_len) {
    valid = frames;
  } else {
    std::vector<Var> rows;
    rows.reserve(static_cast<size_t>(n));
    for (int64_t t = 0; t < t_len; ++t)
      if (mask[static_cast<size_t>(t)]) rows.push_back(slice_rows(frames, t, t + 1));
    valid = concat(rows, 0);
  }
  double inv_n = 1.0 / static_cast<double>(n);
  Var mean_row = scale(sum_axis0(valid), inv_n);
  Var ex2 = scale(sum_axis0(mul(valid, valid)), inv_n);
  Var variance = sub(ex2, mul(mean_row, mean_row));
  Var stddev = advasr::sqrt(add_scalar(variance, 1e-8));
  return concat({mean_row, stddev}, 1);
}

}  // namespace advasr
