// src/ctc.cc

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

#include "advasr/ctc.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace advasr {

Vocab Vocab::from_string(const std::string &chars) {
  Vocab v;
  std::set<char> seen;
  for (char c : chars) {
    if (!seen.insert(c).second)
      throw DataError(str_cat("vocab: duplicate symbol '", c, "'"));
    v.chars_.push_back(c);
  }
  if (v.chars_.empty()) throw DataError("vocab: no symbols");
  return v;
}

std::vector<int> Vocab::ctc_targets(const std::string &transcript) const {
  std::vector<int> out;
  out.reserve(transcript.size());
  for (char c : transcript) {
    auto it = std::find(chars_.begin(), chars_.end(), c);
    if (it == chars_.end())
      throw DataError(str_cat("vocab: symbol '", c, "' not in vocabulary"));
    out.push_back(static_cast<int>(it - chars_.begin()) + 1);
  }
  return out;
}

std::vector<int> Vocab::attn_targets(const std::string &transcript) const {
  std::vector<int> out = ctc_targets(transcript);
  for (int &id : out) id -= 1;
  return out;
}

std::string Vocab::string_of_ctc_ids(const std::vector<int> &ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 1 || id > static_cast<int>(chars_.size()))
      throw DataError(str_cat("vocab: ctc id ", id, " out of range"));
    out.push_back(chars_[static_cast<size_t>(id - 1)]);
  }
  return out;
}

std::string Vocab::string_of_attn_ids(const std::vector<int> &ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(chars_.size()))
      throw DataError(str_cat("vocab: attention id ", id, " out of range"));
    out.push_back(chars_[static_cast<size_t>(id)]);
  }
  return out;
}

std::vector<int> ctc_augment_targets(const std::vector<int> &targets) {
  std::vector<int> aug;
  aug.reserve(2 * targets.size() + 1);
  aug.push_back(Vocab::kBlankIndex);
  for (int y : targets) {
    aug.push_back(y);
    aug.push_back(Vocab::kBlankIndex);
  }
  return aug;
}

int64_t ctc_min_frames(const std::vector<int> &targets) {
  int64_t frames = static_cast<int64_t>(targets.size());
  for (size_t i = 1; i < targets.size(); ++i)
    if (targets[i] == targets[i - 1]) ++frames;
  return frames;
}

namespace {

void validate_targets(const std::vector<int> &targets, int64_t classes) {
  for (int y : targets)
    if (y <= Vocab::kBlankIndex || y >= classes)
      throw DataError(str_cat("ctc: target id ", y, " outside (0, ", classes, ")"));
}

int64_t resolve_valid(const Tensor &value, int64_t n_valid) {
  int64_t t_len = value.rows();
  if (n_valid < 0) return t_len;
  if (n_valid == 0 || n_valid > t_len)
    throw ShapeError(str_cat("ctc: n_valid ", n_valid, " outside [1,", t_len, "]"));
  return n_valid;
}

void check_normalized(const Tensor &log_probs, int64_t t_valid) {
  int64_t n = log_probs.cols();
  for (int64_t t = 0; t < t_valid; ++t) {
    double z = 0.0;
    for (int64_t j = 0; j < n; ++j) z += std::exp(log_probs.at(t, j));
    // loose tolerance: finite-difference probes may leave rows slightly off
    if (std::fabs(z - 1.0) > 1e-3)
      throw NumericError(str_cat("ctc: frame ", t, " posteriors sum to ", z));
  }
}

Var logaddexp(std::vector<Var> terms) {
  if (terms.size() == 1) return terms[0];
  return logsumexp(stack_scalars(terms));
}

}  // namespace

Var ctc_loss(const Var &log_probs, const std::vector<int> &targets,
             int64_t n_valid) {
  const int64_t t_valid = resolve_valid(log_probs->value, n_valid);
  validate_targets(targets, log_probs->cols());
  check_normalized(log_probs->value, t_valid);

  const int64_t min_frames = ctc_min_frames(targets);
  if (min_frames > t_valid)
    throw CtcInfeasibleError(
        str_cat("ctc: target too long: needs ", min_frames, " frames, have ",
                t_valid));

  const std::vector<int> labels = ctc_augment_targets(targets);
  const int64_t s_len = static_cast<int64_t>(labels.size());

  // alpha[s] is the log probability of emitting the first part of the
  // augmented sequence up to state s by the current frame.  Cells with no
  // incoming path stay unset so no -inf ever enters the graph.
  std::vector<Var> alpha(static_cast<size_t>(s_len));
  alpha[0] = pick(log_probs, 0, labels[0]);
  if (s_len > 1) alpha[1] = pick(log_probs, 0, labels[1]);

  for (int64_t t = 1; t < t_valid; ++t) {
    std::vector<Var> next(static_cast<size_t>(s_len));
    for (int64_t s = 0; s < s_len; ++s) {
      std::vector<Var> terms;
      if (alpha[static_cast<size_t>(s)]) terms.push_back(alpha[static_cast<size_t>(s)]);
      if (s >= 1 && alpha[static_cast<size_t>(s - 1)])
        terms.push_back(alpha[static_cast<size_t>(s - 1)]);
      if (s >= 2 && labels[static_cast<size_t>(s)] != Vocab::kBlankIndex &&
          labels[static_cast<size_t>(s)] != labels[static_cast<size_t>(s - 2)] &&
          alpha[static_cast<size_t>(s - 2)])
        terms.push_back(alpha[static_cast<size_t>(s - 2)]);
      if (terms.empty()) continue;
      next[static_cast<size_t>(s)] =
          add(logaddexp(std::move(terms)), pick(log_probs, t, labels[static_cast<size_t>(s)]));
    }
    alpha = std::move(next);
  }

  std::vector<Var> finals;
  if (alpha[static_cast<size_t>(s_len - 1)])
    finals.push_back(alpha[static_cast<size_t>(s_len - 1)]);
  if (s_len > 1 && alpha[static_cast<size_t>(s_len - 2)])
    finals.push_back(alpha[static_cast<size_t>(s_len - 2)]);
  if (finals.empty())
    throw CtcInfeasibleError("ctc: no alignment reaches the final states");
  return neg(logaddexp(std::move(finals)));
}

double ctc_brute_force(const Tensor &log_probs, const std::vector<int> &targets,
                       int64_t n_valid) {
  const int64_t t_valid = resolve_valid(log_probs, n_valid);
  const int64_t classes = log_probs.cols();
  validate_targets(targets, classes);

  double work = 1.0;
  for (int64_t t = 0; t < t_valid; ++t) work *= static_cast<double>(classes);
  if (work > 2e6)
    throw NumericError(str_cat("ctc_brute_force: ", work, " paths is too large"));

  std::vector<int> path(static_cast<size_t>(t_valid), 0);
  double total = 0.0;
  while (true) {
    // Collapse: merge adjacent repeats, then drop blanks.
    std::vector<int> collapsed;
    for (int64_t t = 0; t < t_valid; ++t) {
      int sym = path[static_cast<size_t>(t)];
      if (t > 0 && sym == path[static_cast<size_t>(t - 1)]) continue;
      if (sym != Vocab::kBlankIndex) collapsed.push_back(sym);
    }
    if (collapsed == targets) {
      double lp = 0.0;
      for (int64_t t = 0; t < t_valid; ++t)
        lp += log_probs.at(t, path[static_cast<size_t>(t)]);
      total += std::exp(lp);
    }
    int64_t t = 0;
    while (t < t_valid && ++path[static_cast<size_t>(t)] == classes)
      path[static_cast<size_t>(t++)] = 0;
    if (t == t_valid) break;
  }
  if (total <= 0.0)
    throw CtcInfeasibleError("ctc: target too long: no path collapses to it");
  return -std::log(total);
}

std::vector<int> ctc_greedy_decode(const Tensor &log_probs, int64_t n_valid) {
  const int64_t t_valid = resolve_valid(log_probs, n_valid);
  const int64_t classes = log_probs.cols();
  std::vector<int> out;
  int prev = -1;
  for (int64_t t = 0; t < t_valid; ++t) {
    const double *row = log_probs.data() + t * classes;
    int best = static_cast<int>(std::max_element(row, row + classes) - row);
    if (best != prev && best != Vocab::kBlankIndex) out.push_back(best);
    prev = best;
  }
  return out;
}

CtcHead::CtcHead(const std::string &prefix, int64_t input_dim, const Vocab &vocab,
                 std::mt19937_64 &rng)
    : proj(prefix + ".proj", input_dim, vocab.ctc_classes(), rng) {}

Var CtcHead::log_probs(Tape &tape, const Var &phi) {
  return log_softmax_rows(proj.apply(tape, phi));
}

}  // namespace advasr
