// tests/asr-eval-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "advasr/asr-eval.h"

using namespace advasr;

namespace {

// Exhaustive recursion, the textbook definition.
int64_t recursive_distance(const std::string &ref, const std::string &hyp,
                           size_t i, size_t j) {
  if (i == ref.size()) return static_cast<int64_t>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<int64_t>(ref.size() - i);
  int64_t best = recursive_distance(ref, hyp, i + 1, j + 1) +
                 (ref[i] == hyp[j] ? 0 : 1);
  best = std::min(best, recursive_distance(ref, hyp, i + 1, j) + 1);
  best = std::min(best, recursive_distance(ref, hyp, i, j + 1) + 1);
  return best;
}

std::string random_string(std::mt19937_64 &rng, size_t max_len) {
  std::uniform_int_distribution<size_t> len(0, max_len);
  std::uniform_int_distribution<int> ch(0, 2);
  std::string out;
  for (size_t i = 0, n = len(rng); i < n; ++i)
    out.push_back(static_cast<char>('a' + ch(rng)));
  return out;
}

}  // namespace

TEST_CASE("identical sequences have zero edits") {
  EditOps ops = edit_distance({"a", "b", "c"}, {"a", "b", "c"});
  CHECK(ops.substitutions == 0);
  CHECK(ops.deletions == 0);
  CHECK(ops.insertions == 0);
}

TEST_CASE("single missing token is one deletion") {
  EditOps ops = edit_distance({"a", "b", "c"}, {"a", "c"});
  CHECK(ops.total() == 1);
  CHECK(ops.deletions == 1);
  CHECK(ops.substitutions == 0);
  CHECK(ops.insertions == 0);
}

TEST_CASE("totals match the exhaustive recursive oracle") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::string ref = random_string(rng, 6), hyp = random_string(rng, 6);
    EditOps ops = edit_distance_chars(ref, hyp);
    CHECK(ops.total() == recursive_distance(ref, hyp, 0, 0));
    CHECK(ops.substitutions + ops.deletions + ops.insertions == ops.total());
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 60; ++rep) {
    std::string a = random_string(rng, 5), b = random_string(rng, 5),
                c = random_string(rng, 5);
    int64_t ab = edit_distance_chars(a, b).total();
    int64_t ba = edit_distance_chars(b, a).total();
    CHECK(ab == ba);
    int64_t ac = edit_distance_chars(a, c).total();
    int64_t cb = edit_distance_chars(c, b).total();
    CHECK(ab <= ac + cb);
  }
}

TEST_CASE("pooled word error rate") {
  CHECK(wer_strings({"a b c", "d e"}, {"a b c", "d e"}) == 0.0);
  // 1 error over 3 reference words.
  CHECK(wer_strings({"a b c"}, {"a x c"}) == doctest::Approx(100.0 / 3.0));
  // Pooling: 2 errors over 5 words, not the mean of per-utterance rates.
  CHECK(wer_strings({"a b c", "d e"}, {"a x c", "d x e"}) ==
        doctest::Approx(100.0 * 2.0 / 5.0));
  CHECK_THROWS_AS(wer_strings({}, {}), DataError);
  CHECK_THROWS_AS(wer_strings({"a"}, {"a", "b"}), DataError);
}

TEST_CASE("insertions can push the rate past one hundred") {
  double rate = wer_strings({"a"}, {"x y z"});
  CHECK(rate == doctest::Approx(300.0));
  CHECK(rate > 100.0);
}

TEST_CASE("character error rate") {
  CHECK(cer({"ab"}, {"ab"}) == 0.0);
  CHECK(cer({"ab"}, {"ac"}) == doctest::Approx(50.0));
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    std::string ref = random_string(rng, 6), hyp = random_string(rng, 6);
    if (ref.empty()) continue;
    double want = 100.0 * static_cast<double>(edit_distance_chars(ref, hyp).total()) /
                  static_cast<double>(ref.size());
    CHECK(cer({ref}, {hyp}) == doctest::Approx(want));
  }
}

TEST_CASE("scoring report carries per-utterance rows and a summary") {
  std::string csv = scoring_report_csv({"u1", "u2"}, {"ab", "cd"}, {"ab", "cx"});
  CHECK(csv.find("id,ref,hyp,sub,del,ins") != std::string::npos);
  CHECK(csv.find("u1,ab,ab,0,0,0") != std::string::npos);
  CHECK(csv.find("u2,cd,cx,1,0,0") != std::string::npos);
  CHECK(csv.find("TOTAL,,,1,0,0") != std::string::npos);
}
