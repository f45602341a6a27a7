// include/advasr/encoder.h

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

#ifndef ADVASR_ENCODER_H_
#define ADVASR_ENCODER_H_

#include <string>
#include <utility>
#include <vector>

#include "advasr/layers.h"

namespace advasr {

struct EncoderConfig {
  int64_t input_dim = 16;
  int64_t hidden_dim = 32;
  int64_t num_layers = 2;
  int64_t downsample_factor = 4;

  void validate() const;
};

/// The encoded representation of one utterance: what a device would compute
/// locally and ship to the service for decoding.
struct EncodedRepr {
  Tensor frames;  // T' x D
  int64_t downsample_factor = 1;
  std::string source_utterance_id;
};

/// Frame decimation followed by a stack of bidirectional recurrent layers.
struct Encoder {
  EncoderConfig cfg;
  std::vector<BiGruLayer> layers;

  struct EncodeStats {
    uint64_t calls = 0;
    double seconds = 0.0;
  };
  EncodeStats stats;

  Encoder() = default;
  Encoder(const EncoderConfig &config, std::mt19937_64 &rng);

  int64_t output_dim() const { return 2 * cfg.hidden_dim; }

  /// Graph-building forward pass; returns the [T' x D] frames and the
  /// subsampled mask.
  std::pair<Var, Mask> forward(Tape &tape, const Tensor &features,
                               const Mask &mask);

  /// Value-only convenience used outside training.
  EncodedRepr encode(const Tensor &features, const Mask &mask,
                     const std::string &utterance_id);

  void visit(const ParamVisitor &fn);
};

}  // namespace advasr

#endif  // ADVASR_ENCODER_H_
