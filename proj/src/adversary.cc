// src/adversary.cc

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

#include "advasr/adversary.h"

#include <algorithm>
#include <set>

namespace advasr {

SpeakerTable::SpeakerTable(std::vector<std::string> speaker_ids)
    : ids_(std::move(speaker_ids)) {
  std::set<std::string> seen(ids_.begin(), ids_.end());
  if (seen.size() != ids_.size())
    throw DataError("speaker table: duplicate speaker id");
  if (ids_.empty()) throw DataError("speaker table: empty");
}

int64_t SpeakerTable::class_of(const std::string &speaker_id) const {
  auto it = std::find(ids_.begin(), ids_.end(), speaker_id);
  if (it == ids_.end())
    throw DataError("speaker table: unknown speaker '" + speaker_id + "'");
  return static_cast<int64_t>(it - ids_.begin());
}

void AdversaryConfig::validate() const {
  if (input_dim <= 0 || hidden_dim <= 0 || num_layers <= 0 || num_speakers < 2)
    throw DataError("adversary config: need positive dims and >= 2 speakers");
}

Adversary::Adversary(const std::string &prefix, const AdversaryConfig &config,
                     std::mt19937_64 &rng)
    : cfg(config) {
  cfg.validate();
  int64_t in = cfg.input_dim;
  for (int64_t l = 0; l < cfg.num_layers; ++l) {
    layers.emplace_back(str_cat(prefix, ".layer", l), in, cfg.hidden_dim, rng);
    in = 2 * cfg.hidden_dim;
  }
  head = Linear(prefix + ".head", in, cfg.num_speakers, rng);
}

Var Adversary::forward(Tape &tape, const Var &phi, const Mask &mask) {
  if (phi->rows() == 0) throw ShapeError("adversary: empty representation");
  if (phi->cols() != cfg.input_dim)
    throw ShapeError(str_cat("adversary: input dim ", phi->cols(),
                             " != configured ", cfg.input_dim));
  Var h = phi;
  for (auto &layer : layers) h = layer.apply(tape, h, mask);
  return log_softmax_rows(head.apply(tape, h));
}

void Adversary::visit(const ParamVisitor &fn) {
  for (auto &layer : layers) layer.visit(fn);
  head.visit(fn);
}

Var adversary_loss(const Var &frame_log_posteriors, int64_t speaker_class,
                   const Mask &mask) {
  int64_t t_len = frame_log_posteriors->rows();
  if (static_cast<int64_t>(mask.size()) != t_len)
    throw ShapeError(str_cat("adversary loss: mask length ", mask.size(),
                             " != frame count ", t_len));
  if (speaker_class < 0 || speaker_class >= frame_log_posteriors->cols())
    throw DataError(str_cat("adversary loss: class ", speaker_class,
                            " outside [0,", frame_log_posteriors->cols(), ")"));
  std::vector<Var> terms;
  for (int64_t t = 0; t < t_len; ++t)
    if (mask[static_cast<size_t>(t)])
      terms.push_back(neg(pick(frame_log_posteriors, t, speaker_class)));
  if (terms.empty()) throw ShapeError("adversary loss: all frames masked");
  if (terms.size() == 1) return terms[0];
  return sum(stack_scalars(terms));
}

std::pair<int64_t, std::vector<double>> utterance_speaker_decision(
    const Tensor &frame_log_posteriors, const Mask &mask) {
  int64_t t_len = frame_log_posteriors.rows();
  int64_t classes = frame_log_posteriors.cols();
  if (static_cast<int64_t>(mask.size()) != t_len)
    throw ShapeError(str_cat("speaker decision: mask length ", mask.size(),
                             " != frame count ", t_len));
  int64_t n = mask_count(mask);
  if (n == 0) throw ShapeError("speaker decision: all frames masked");

  std::vector<double> avg(static_cast<size_t>(classes), 0.0);
  for (int64_t t = 0; t < t_len; ++t) {
    if (!mask[static_cast<size_t>(t)]) continue;
    for (int64_t k = 0; k < classes; ++k)
      avg[static_cast<size_t>(k)] += frame_log_posteriors.at(t, k);
  }
  for (double &v : avg) v /= static_cast<double>(n);
  int64_t best = 0;
  for (int64_t k = 1; k < classes; ++k)
    if (avg[static_cast<size_t>(k)] > avg[static_cast<size_t>(best)]) best = k;
  return {best, avg};
}

}  // namespace advasr
