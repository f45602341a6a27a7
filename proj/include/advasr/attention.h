// include/advasr/attention.h

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

#ifndef ADVASR_ATTENTION_H_
#define ADVASR_ATTENTION_H_

#include <utility>
#include <vector>

#include "advasr/ctc.h"
#include "advasr/layers.h"

namespace advasr {

struct AttentionConfig {
  int64_t phi_dim = 0;       // encoder output dimension
  int64_t hidden_dim = 16;   // decoder recurrent state
  int64_t attn_dim = 16;     // score space
  int64_t conv_channels = 4; // location-feature channels
  int64_t conv_width = 3;    // odd window over previous weights
  int64_t embed_dim = 8;     // input symbol embedding

  void validate() const;
};

/// Autoregressive character decoder with location-aware attention:
/// score_t = v^T tanh(W s + U phi_t + F conv(prev_weights)_t), weights are a
/// softmax over valid frames, and each step consumes the previous symbol's
/// embedding next to the attention context.
struct AttentionDecoder {
  AttentionConfig cfg;
  Vocab vocab;

  Param embed;    // (1 + chars) x embed_dim, row 0 = sos
  GruCell cell;   // (embed_dim + phi_dim) -> hidden_dim
  Param w_state;  // hidden x attn_dim
  Param u_phi;    // phi_dim x attn_dim
  Param f_conv;   // channels x attn_dim
  Param conv_k;   // channels x width
  Param v_score;  // attn_dim x 1
  Linear out;     // (hidden + phi_dim) x (chars + eos)

  AttentionDecoder() = default;
  AttentionDecoder(const std::string &prefix, const AttentionConfig &config,
                   const Vocab &v, std::mt19937_64 &rng);

  /// One attention read over the valid frames of phi: returns the context
  /// vector [1 x D] and the new weights [1 x n].
  std::pair<Var, Var> attend(Tape &tape, const Var &hidden,
                             const Var &prev_weights, const Var &phi_valid);

  /// Teacher-forced negative log likelihood of the transcript, eos included
  /// as the final step.  targets are attention output ids (no eos).
  Var loss(Tape &tape, const Var &phi, const Mask &mask,
           const std::vector<int> &targets);

  /// Length-bounded beam search; hypotheses end at eos, score is the sum of
  /// log posteriors, ties break toward the lexicographically smallest
  /// sequence.  Returns attention output ids (no eos).
  std::vector<int> beam_decode(const Tensor &phi, int64_t n_valid,
                               int64_t beam_size, int64_t max_len);

  /// Sum of per-step log posteriors of a fixed symbol sequence (the beam
  /// score of that sequence); with_eos appends the eos step.
  double sequence_score(const Tensor &phi, int64_t n_valid,
                        const std::vector<int> &targets, bool with_eos);

  void visit(const ParamVisitor &fn);

 private:
  struct Step {
    Var hidden;
    Var weights;
    Var log_post;  // 1 x (chars + eos)
  };
  Step step(Tape &tape, const Var &phi_valid, const Var &hidden,
            const Var &prev_weights, int64_t prev_embed_id);
  Var initial_weights(int64_t n) const;
};

}  // namespace advasr

#endif  // ADVASR_ATTENTION_H_
