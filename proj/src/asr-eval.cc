// src/asr-eval.cc

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

#include "advasr/asr-eval.h"

#include <sstream>

namespace advasr {

EditOps edit_distance(const std::vector<std::string> &ref,
                      const std::vector<std::string> &hyp) {
  return edit_distance_tokens(ref, hyp);
}

EditOps edit_distance_chars(const std::string &ref, const std::string &hyp) {
  return edit_distance_tokens(std::vector<char>(ref.begin(), ref.end()),
                              std::vector<char>(hyp.begin(), hyp.end()));
}

std::vector<std::string> split_words(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

namespace {
double pooled_rate(int64_t errors, int64_t ref_tokens) {
  if (ref_tokens == 0) throw DataError("wer: empty reference corpus");
  return 100.0 * static_cast<double>(errors) / static_cast<double>(ref_tokens);
}
}  // namespace

double wer(const std::vector<std::vector<std::string>> &refs,
           const std::vector<std::vector<std::string>> &hyps) {
  if (refs.size() != hyps.size())
    throw DataError(str_cat("wer: ", refs.size(), " references vs ", hyps.size(),
                            " hypotheses"));
  int64_t errors = 0, tokens = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]).total();
    tokens += static_cast<int64_t>(refs[i].size());
  }
  return pooled_rate(errors, tokens);
}

double wer_strings(const std::vector<std::string> &refs,
                   const std::vector<std::string> &hyps) {
  std::vector<std::vector<std::string>> r, h;
  for (const auto &s : refs) r.push_back(split_words(s));
  for (const auto &s : hyps) h.push_back(split_words(s));
  return wer(r, h);
}

double cer(const std::vector<std::string> &refs,
           const std::vector<std::string> &hyps) {
  if (refs.size() != hyps.size())
    throw DataError(str_cat("cer: ", refs.size(), " references vs ", hyps.size(),
                            " hypotheses"));
  int64_t errors = 0, tokens = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance_chars(refs[i], hyps[i]).total();
    tokens += static_cast<int64_t>(refs[i].size());
  }
  return pooled_rate(errors, tokens);
}

std::string scoring_report_csv(const std::vector<std::string> &ids,
                               const std::vector<std::string> &refs,
                               const std::vector<std::string> &hyps) {
  if (ids.size() != refs.size() || refs.size() != hyps.size())
    throw DataError("scoring report: id/ref/hyp length mismatch");
  std::ostringstream out;
  out << "id,ref,hyp,sub,del,ins\n";
  EditOps total;
  int64_t ref_chars = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    EditOps ops = edit_distance_chars(refs[i], hyps[i]);
    out << ids[i] << "," << refs[i] << "," << hyps[i] << "," << ops.substitutions
        << "," << ops.deletions << "," << ops.insertions << "\n";
    total.substitutions += ops.substitutions;
    total.deletions += ops.deletions;
    total.insertions += ops.insertions;
    ref_chars += static_cast<int64_t>(refs[i].size());
  }
  out << "TOTAL,,," << total.substitutions << "," << total.deletions << ","
      << total.insertions << "\n";
  return out.str();
}

}  // namespace advasr
