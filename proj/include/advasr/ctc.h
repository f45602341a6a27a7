// include/advasr/ctc.h

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

#ifndef ADVASR_CTC_H_
#define ADVASR_CTC_H_

#include <string>
#include <vector>

#include "advasr/layers.h"

namespace advasr {

/// Output symbol table.  The CTC class space is {blank} + chars with blank
/// fixed at index 0; the attention output space is chars + eos; the decoder
/// input embedding space is sos + chars.
class Vocab {
 public:
  static constexpr int kBlankIndex = 0;

  static Vocab from_string(const std::string &chars);

  int64_t num_chars() const { return static_cast<int64_t>(chars_.size()); }
  int64_t ctc_classes() const { return num_chars() + 1; }
  int64_t attn_classes() const { return num_chars() + 1; }
  int64_t embed_classes() const { return num_chars() + 1; }

  int64_t eos_output() const { return num_chars(); }  // attention output index
  int64_t sos_embedding() const { return 0; }         // decoder input index

  /// Transcript -> CTC char ids in [1, num_chars].
  std::vector<int> ctc_targets(const std::string &transcript) const;
  /// Transcript -> attention output ids in [0, num_chars); eos not included.
  std::vector<int> attn_targets(const std::string &transcript) const;

  std::string string_of_ctc_ids(const std::vector<int> &ids) const;
  std::string string_of_attn_ids(const std::vector<int> &ids) const;
  char char_at(int64_t i) const { return chars_.at(static_cast<size_t>(i)); }
  std::string to_string() const { return {chars_.begin(), chars_.end()}; }

 private:
  std::vector<char> chars_;
};

/// Requested alignment target cannot fit in the available frames.
struct CtcInfeasibleError : NumericError {
  explicit CtcInfeasibleError(const std::string &msg) : NumericError(msg) {}
};

/// Blank-augmented target (blank, y_1, blank, ..., y_M, blank).
std::vector<int> ctc_augment_targets(const std::vector<int> &targets);

/// Minimal number of frames that can emit the target: M plus one separating
/// blank per adjacent repeated character.
int64_t ctc_min_frames(const std::vector<int> &targets);

/// Negative log probability of the target under the per-frame posteriors,
/// summed over all alignments by the log-space forward recursion.
/// log_probs is [T' x V'] with blank at column 0; rows must be normalized.
/// Only the first n_valid frames participate (-1 = all).
Var ctc_loss(const Var &log_probs, const std::vector<int> &targets,
             int64_t n_valid = -1);

/// Exhaustive path enumeration oracle (feasible only for tiny instances).
double ctc_brute_force(const Tensor &log_probs, const std::vector<int> &targets,
                       int64_t n_valid = -1);

/// Per-frame argmax (ties to the lowest index), collapse repeats, strip
/// blanks.  Returns CTC char ids.
std::vector<int> ctc_greedy_decode(const Tensor &log_probs, int64_t n_valid = -1);

/// Frame-level CTC posteriors: linear projection + log-softmax over the
/// blank-augmented class space.
struct CtcHead {
  Linear proj;

  CtcHead() = default;
  CtcHead(const std::string &prefix, int64_t input_dim, const Vocab &vocab,
          std::mt19937_64 &rng);

  Var log_probs(Tape &tape, const Var &phi);
  void visit(const ParamVisitor &fn) { proj.visit(fn); }
};

}  // namespace advasr

#endif  // ADVASR_CTC_H_
