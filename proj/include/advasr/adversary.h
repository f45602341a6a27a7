// include/advasr/adversary.h

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

#ifndef ADVASR_ADVERSARY_H_
#define ADVASR_ADVERSARY_H_

#include <string>
#include <utility>
#include <vector>

#include "advasr/layers.h"

namespace advasr {

/// Frozen bijection between speaker ids and class indices.
class SpeakerTable {
 public:
  SpeakerTable() = default;
  explicit SpeakerTable(std::vector<std::string> speaker_ids);

  int64_t size() const { return static_cast<int64_t>(ids_.size()); }
  int64_t class_of(const std::string &speaker_id) const;
  const std::string &id_of(int64_t cls) const { return ids_.at(static_cast<size_t>(cls)); }
  const std::vector<std::string> &ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

struct AdversaryConfig {
  int64_t input_dim = 0;
  int64_t hidden_dim = 32;
  int64_t num_layers = 1;
  int64_t num_speakers = 0;

  void validate() const;
};

/// Speaker classifier over encoded frames: a bidirectional recurrent stack
/// with a per-frame linear + log-softmax head.  Serves both as the
/// adversarial branch during training and as the closed-set attacker.
struct Adversary {
  AdversaryConfig cfg;
  std::vector<BiGruLayer> layers;
  Linear head;

  Adversary() = default;
  Adversary(const std::string &prefix, const AdversaryConfig &config,
            std::mt19937_64 &rng);

  /// [T' x num_speakers] per-frame log posteriors.
  Var forward(Tape &tape, const Var &phi, const Mask &mask);

  void visit(const ParamVisitor &fn);
};

/// Sum over unmasked frames of the negative log posterior of the true
/// speaker (the speaker label is duplicated across the frame axis).
Var adversary_loss(const Var &frame_log_posteriors, int64_t speaker_class,
                   const Mask &mask);

/// Utterance-level decision: average the frame log posteriors over unmasked
/// frames and take the argmax (ties to the lowest class).  Returns the class
/// and the averaged log distribution.
std::pair<int64_t, std::vector<double>> utterance_speaker_decision(
    const Tensor &frame_log_posteriors, const Mask &mask);

}  // namespace advasr

#endif  // ADVASR_ADVERSARY_H_
