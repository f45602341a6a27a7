// src/encoder.cc

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

#include "advasr/encoder.h"

#include <chrono>

namespace advasr {

void EncoderConfig::validate() const {
  if (input_dim <= 0 || hidden_dim <= 0 || num_layers <= 0 || downsample_factor <= 0)
    throw DataError(str_cat("encoder config: all dimensions must be positive (",
                            input_dim, ", ", hidden_dim, ", ", num_layers, ", ",
                            downsample_factor, ")"));
}

Encoder::Encoder(const EncoderConfig &config, std::mt19937_64 &rng) : cfg(config) {
  cfg.validate();
  int64_t in = cfg.input_dim;
  for (int64_t l = 0; l < cfg.num_layers; ++l) {
    layers.emplace_back(str_cat("encoder.layer", l), in, cfg.hidden_dim, rng);
    in = 2 * cfg.hidden_dim;
  }
}

std::pair<Var, Mask> Encoder::forward(Tape &tape, const Tensor &features,
                                      const Mask &mask) {
  if (features.rows() == 0) throw ShapeError("encode: empty feature sequence");
  if (features.cols() != cfg.input_dim)
    throw ShapeError(str_cat("encode: feature dim ", features.cols(),
                             " != configured ", cfg.input_dim));
  if (static_cast<int64_t>(mask.size()) != features.rows())
    throw ShapeError(str_cat("encode: mask length ", mask.size(),
                             " != frame count ", features.rows()));

  Var h = subsample(make_const(features), cfg.downsample_factor);
  Mask sub_mask = subsample_mask(mask, cfg.downsample_factor);
  for (auto &layer : layers) h = layer.apply(tape, h, sub_mask);
  return {h, sub_mask};
}

EncodedRepr Encoder::encode(const Tensor &features, const Mask &mask,
                            const std::string &utterance_id) {
  auto t0 = std::chrono::steady_clock::now();
  Tape tape;
  auto [frames, sub_mask] = forward(tape, features, mask);
  (void)sub_mask;
  if (!frames->value.all_finite())
    throw NumericError("encode: non-finite value in encoded representation");
  EncodedRepr repr{frames->value, cfg.downsample_factor, utterance_id};
  stats.calls += 1;
  stats.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return repr;
}

void Encoder::visit(const ParamVisitor &fn) {
  for (auto &layer : layers) layer.visit(fn);
}

}  // namespace advasr
