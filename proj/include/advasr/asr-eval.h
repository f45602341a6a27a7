// include/advasr/asr-eval.h

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

#ifndef ADVASR_ASR_EVAL_H_
#define ADVASR_ASR_EVAL_H_

#include <string>
#include <vector>

#include "advasr/common.h"

namespace advasr {

struct EditOps {
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;

  int64_t total() const { return substitutions + deletions + insertions; }
};

/// Minimal S+D+I alignment between token sequences.  When several
/// backtraces tie, substitution is preferred over insertion over deletion
/// (this affects the op split, never the total).
template <typename Token>
EditOps edit_distance_tokens(const std::vector<Token> &ref,
                             const std::vector<Token> &hyp) {
  const size_t r = ref.size(), h = hyp.size();
  std::vector<std::vector<int64_t>> d(r + 1, std::vector<int64_t>(h + 1, 0));
  for (size_t i = 0; i <= r; ++i) d[i][0] = static_cast<int64_t>(i);
  for (size_t j = 0; j <= h; ++j) d[0][j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= r; ++i)
    for (size_t j = 1; j <= h; ++j) {
      int64_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int64_t ins = d[i][j - 1] + 1;
      int64_t del = d[i - 1][j] + 1;
      d[i][j] = std::min({sub, ins, del});
    }

  EditOps ops;
  size_t i = r, j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++ops.substitutions;
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++ops.insertions;
      --j;
    } else {
      ++ops.deletions;
      --i;
    }
  }
  return ops;
}

EditOps edit_distance(const std::vector<std::string> &ref,
                      const std::vector<std::string> &hyp);
EditOps edit_distance_chars(const std::string &ref, const std::string &hyp);

std::vector<std::string> split_words(const std::string &text);

/// Corpus-pooled word error rate in percent: 100 * sum(S+D+I) / sum(|ref|).
double wer(const std::vector<std::vector<std::string>> &refs,
           const std::vector<std::vector<std::string>> &hyps);
double wer_strings(const std::vector<std::string> &refs,
                   const std::vector<std::string> &hyps);

/// Character-level analogue of wer over the same pooling convention.
double cer(const std::vector<std::string> &refs,
           const std::vector<std::string> &hyps);

/// Per-utterance CSV (id, ref, hyp, S, D, I at character level) followed by
/// a summary row.
std::string scoring_report_csv(const std::vector<std::string> &ids,
                               const std::vector<std::string> &refs,
                               const std::vector<std::string> &hyps);

}  // namespace advasr

#endif  // ADVASR_ASR_EVAL_H_
