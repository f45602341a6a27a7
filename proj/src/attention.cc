// src/attention.cc

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

#include "advasr/attention.h"

#include <algorithm>
#include <cmath>

namespace advasr {

void AttentionConfig::validate() const {
  if (phi_dim <= 0 || hidden_dim <= 0 || attn_dim <= 0 || conv_channels <= 0 ||
      embed_dim <= 0)
    throw DataError("attention config: all dimensions must be positive");
  if (conv_width < 1 || conv_width % 2 == 0)
    throw DataError(str_cat("attention config: conv width ", conv_width,
                            " must be odd"));
}

AttentionDecoder::AttentionDecoder(const std::string &prefix,
                                   const AttentionConfig &config, const Vocab &v,
                                   std::mt19937_64 &rng)
    : cfg(config),
      vocab(v),
      embed(prefix + ".embed", Tensor({v.embed_classes(), config.embed_dim})),
      cell(prefix + ".cell", config.embed_dim + config.phi_dim, config.hidden_dim, rng),
      w_state(prefix + ".w_state", Tensor({config.hidden_dim, config.attn_dim})),
      u_phi(prefix + ".u_phi", Tensor({config.phi_dim, config.attn_dim})),
      f_conv(prefix + ".f_conv", Tensor({config.conv_channels, config.attn_dim})),
      conv_k(prefix + ".conv_k", Tensor({config.conv_channels, config.conv_width})),
      v_score(prefix + ".v_score", Tensor({config.attn_dim, 1})),
      out(prefix + ".out", config.hidden_dim + config.phi_dim, v.attn_classes(), rng) {
  cfg.validate();
  glorot_init(embed.value, v.embed_classes(), cfg.embed_dim, rng);
  glorot_init(w_state.value, cfg.hidden_dim, cfg.attn_dim, rng);
  glorot_init(u_phi.value, cfg.phi_dim, cfg.attn_dim, rng);
  glorot_init(f_conv.value, cfg.conv_channels, cfg.attn_dim, rng);
  glorot_init(conv_k.value, cfg.conv_channels, cfg.conv_width, rng);
  glorot_init(v_score.value, cfg.attn_dim, 1, rng);
}

Var AttentionDecoder::initial_weights(int64_t n) const {
  return make_const(Tensor::full({1, n}, 1.0 / static_cast<double>(n)));
}

std::pair<Var, Var> AttentionDecoder::attend(Tape &tape, const Var &hidden,
                                             const Var &prev_weights,
                                             const Var &phi_valid) {
  int64_t n = phi_valid->rows();
  if (n == 0) throw ShapeError("attend: all frames masked");
  if (prev_weights->cols() != n)
    throw ShapeError(str_cat("attend: weights length ", prev_weights->cols(),
                             " != frame count ", n));

  // Location features: [n x width] windows of the previous weights.
  Var w_col = transpose(prev_weights);  // n x 1
  int64_t half = cfg.conv_width / 2;
  std::vector<Var> cols;
  for (int64_t off = -half; off <= half; ++off) {
    if (n == 1) {
      cols.push_back(off == 0 ? w_col : make_const(Tensor({1, 1})));
      continue;
    }
    if (off < 0) {
      // Shift down: rows [0, -off) become zero.
      cols.push_back(concat({make_const(Tensor({-off, 1})),
                             slice_rows(w_col, 0, n + off)}, 0));
    } else if (off > 0) {
      cols.push_back(concat({slice_rows(w_col, off, n),
                             make_const(Tensor({off, 1}))}, 0));
    } else {
      cols.push_back(w_col);
    }
  }
  Var windows = cfg.conv_width == 1 ? cols[0] : concat(cols, 1);  // n x width
  Var loc = matmul(matmul(windows, transpose(tape.use(conv_k))),   // n x channels
                   tape.use(f_conv));                              // n x attn_dim

  Var proj = add(add(matmul(phi_valid, tape.use(u_phi)), loc),
                 matmul(hidden, tape.use(w_state)));  // broadcast over rows
  Var scores = transpose(matmul(tanh(proj), tape.use(v_score)));  // 1 x n
  Var weights = softmax_rows(scores);
  Var context = matmul(weights, phi_valid);  // 1 x phi_dim
  return {context, weights};
}

AttentionDecoder::Step AttentionDecoder::step(Tape &tape, const Var &phi_valid,
                                              const Var &hidden,
                                              const Var &prev_weights,
                                              int64_t prev_embed_id) {
  auto [context, weights] = attend(tape, hidden, prev_weights, phi_valid);
  Var prev_sym = embedding_lookup(tape.use(embed), {prev_embed_id});
  Var x = concat({prev_sym, context}, 1);
  Var h = cell.step(tape, x, hidden);
  Var log_post = log_softmax_rows(out.apply(tape, concat({h, context}, 1)));
  return {h, weights, log_post};
}

Var AttentionDecoder::loss(Tape &tape, const Var &phi, const Mask &mask,
                           const std::vector<int> &targets) {
  int64_t n = prefix_length(mask);
  if (n == 0) throw ShapeError("attention loss: all frames masked");
  for (int id : targets)
    if (id < 0 || id >= static_cast<int>(vocab.num_chars()))
      throw DataError(str_cat("attention loss: symbol id ", id, " outside vocab"));

  Var phi_valid = n == phi->rows() ? phi : slice_rows(phi, 0, n);
  Var hidden = make_const(Tensor({1, cfg.hidden_dim}));
  Var weights = initial_weights(n);
  int64_t prev = vocab.sos_embedding();

  std::vector<Var> steps;
  steps.reserve(targets.size() + 1);
  for (size_t m = 0; m <= targets.size(); ++m) {
    Step s = step(tape, phi_valid, hidden, weights, prev);
    int64_t target = (m < targets.size()) ? targets[m] : vocab.eos_output();
    steps.push_back(neg(pick(s.log_post, 0, target)));
    hidden = s.hidden;
    weights = s.weights;
    if (m < targets.size()) prev = targets[m] + 1;  // char id -> embedding row
  }
  return sum(stack_scalars(steps));
}

std::vector<int> AttentionDecoder::beam_decode(const Tensor &phi, int64_t n_valid,
                                               int64_t beam_size, int64_t max_len) {
  if (beam_size < 1)
    throw DataError(str_cat("beam_decode: beam size ", beam_size, " < 1"));
  if (n_valid <= 0 || n_valid > phi.rows())
    throw ShapeError(str_cat("beam_decode: n_valid ", n_valid, " outside [1,",
                             phi.rows(), "]"));

  struct Hyp {
    std::vector<int> seq;  // attention output ids, no eos
    double score = 0.0;
    Var hidden, weights;
    bool done = false;
  };

  Tape tape;
  Var phi_valid = make_const([&] {
    Tensor t({n_valid, phi.cols()});
    std::copy(phi.data(), phi.data() + n_valid * phi.cols(), t.data());
    return t;
  }());

  std::vector<Hyp> beam{{{},
                         0.0,
                         make_const(Tensor({1, cfg.hidden_dim})),
                         initial_weights(n_valid),
                         false}};

  auto better = [](const Hyp &a, const Hyp &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.seq < b.seq;
  };

  for (int64_t len = 0; len < max_len; ++len) {
    bool any_live = false;
    std::vector<Hyp> candidates;
    for (auto &h : beam) {
      if (h.done) {
        candidates.push_back(h);
        continue;
      }
      any_live = true;
      int64_t prev = h.seq.empty() ? vocab.sos_embedding() : h.seq.back() + 1;
      Step s = step(tape, phi_valid, h.hidden, h.weights, prev);
      for (int64_t j = 0; j < vocab.attn_classes(); ++j) {
        Hyp next = h;
        next.score += s.log_post->value[j];
        next.hidden = s.hidden;
        next.weights = s.weights;
        if (j == vocab.eos_output()) {
          next.done = true;
        } else {
          next.seq.push_back(static_cast<int>(j));
        }
        candidates.push_back(std::move(next));
      }
    }
    if (!any_live) break;
    std::sort(candidates.begin(), candidates.end(), better);
    if (static_cast<int64_t>(candidates.size()) > beam_size)
      candidates.resize(static_cast<size_t>(beam_size));
    beam = std::move(candidates);
  }

  const Hyp *best = &beam.front();
  for (const auto &h : beam)
    if (better(h, *best)) best = &h;
  return best->seq;
}

double AttentionDecoder::sequence_score(const Tensor &phi, int64_t n_valid,
                                        const std::vector<int> &targets,
                                        bool with_eos) {
  Tape tape;
  Tensor valid({n_valid, phi.cols()});
  std::copy(phi.data(), phi.data() + n_valid * phi.cols(), valid.data());
  Var phi_valid = make_const(valid);
  Var hidden = make_const(Tensor({1, cfg.hidden_dim}));
  Var weights = initial_weights(n_valid);
  int64_t prev = vocab.sos_embedding();
  double score = 0.0;
  for (size_t m = 0; m < targets.size() + (with_eos ? 1 : 0); ++m) {
    Step s = step(tape, phi_valid, hidden, weights, prev);
    int64_t target = (m < targets.size()) ? targets[m] : vocab.eos_output();
    score += s.log_post->value[target];
    hidden = s.hidden;
    weights = s.weights;
    if (m < targets.size()) prev = targets[m] + 1;
  }
  return score;
}

void AttentionDecoder::visit(const ParamVisitor &fn) {
  fn(embed);
  cell.visit(fn);
  fn(w_state);
  fn(u_phi);
  fn(f_conv);
  fn(conv_k);
  fn(v_score);
  out.visit(fn);
}

}  // namespace advasr
