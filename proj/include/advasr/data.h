// include/advasr/data.h

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

#ifndef ADVASR_DATA_H_
#define ADVASR_DATA_H_

#include <map>
#include <string>
#include <vector>

#include "advasr/adversary.h"
#include "advasr/ctc.h"
#include "advasr/layers.h"
#include "advasr/tensor.h"

namespace advasr {

struct Utterance {
  std::string id;
  Tensor features;  // T x F
  std::string transcript;
  std::string speaker_id;
  std::string group;  // speaker group label ("A"/"B")
  std::string split;  // empty until make_splits assigns one
};

struct CorpusConfig {
  int64_t num_speakers = 8;
  int64_t utts_per_speaker = 8;
  std::string vocab = "abcde";
  int64_t feature_dim = 16;
  int64_t min_symbols = 3;
  int64_t max_symbols = 6;
  int64_t min_seg_frames = 8;
  int64_t max_seg_frames = 14;
  double noise = 0.1;
  double speaker_strength = 1.0;
  uint64_t seed = 1234;
  // Encoder decimation assumed when checking alignment feasibility.
  int64_t downsample_factor = 4;
  // Long-utterance caps applied by the generator.
  int64_t max_frames = 3000;
  int64_t max_chars = 400;

  void validate() const;
};

struct Corpus {
  CorpusConfig config;
  std::vector<Utterance> utterances;

  Vocab vocab() const { return Vocab::from_string(config.vocab); }
  std::vector<const Utterance *> split(const std::string &name) const;
  std::vector<std::string> speakers_in(const std::string &split_name) const;
  /// Class table over the speakers of the closed-set training split.
  SpeakerTable closed_speaker_table() const;
  const Utterance &by_id(const std::string &id) const;
};

/// Renders random transcripts as per-symbol feature templates plus white
/// noise, then applies a per-speaker affine channel (offset + diagonal gain
/// + spectral tilt) scaled by speaker_strength.  strength 0 leaves no
/// speaker information in the features.
Corpus generate_synthetic_corpus(const CorpusConfig &config);

struct SplitScheme {
  int64_t open_speakers = 0;    // reserved for open-set evaluation
  int64_t test_per_speaker = 2; // closed-set test utterances per speaker
  int64_t dev_per_speaker = 2;
};

/// Assigns splits: per closed-set speaker 2 utterances each to test-adv and
/// dev-adv with the rest in train-adv; open-set speakers are held out
/// entirely under the "open" split.
void make_splits(Corpus &corpus, const SplitScheme &scheme);

struct Trial {
  std::string enroll_speaker;
  std::string test_utterance;
  bool genuine = false;
};

struct TrialSet {
  std::map<std::string, std::vector<std::string>> enrollment;  // speaker -> utts
  std::vector<std::string> test_utterances;
  std::vector<Trial> trials;
  std::vector<std::string> excluded_speakers;
};

/// Greedily fills each open-set speaker's enrollment until the frame budget
/// is met; the remaining utterances become the test pool and the trial list
/// is the full cross product of enrolled speakers and test utterances.
/// Speakers that cannot meet the budget while keeping at least one test
/// utterance are excluded (reported in excluded_speakers).
TrialSet build_trials(const Corpus &corpus, const std::string &split_name,
                      int64_t enroll_budget_frames, uint64_t seed);

struct Batch {
  std::vector<const Utterance *> members;
  std::vector<Tensor> features;  // padded to the batch max T
  std::vector<Mask> masks;
};

/// Sorts by length, groups into batches of at most max_batch, pads to the
/// longest member and emits masks.
std::vector<Batch> make_batches(const std::vector<const Utterance *> &utts,
                                int64_t max_batch);

// -- On-disk formats ---------------------------------------------------------
//
// A corpus directory holds manifest.jsonl (a JSON header line followed by one
// JSON record per utterance) and features.blob (magic "ADVASRB1" + raw
// little-endian 64-bit floats addressed by manifest byte offsets).  Encoded
// representation sets reuse the same layout with a different manifest header.

void save_corpus(const Corpus &corpus, const std::string &dir);
Corpus load_corpus(const std::string &dir);

struct ReprSet {
  int64_t dim = 0;
  int64_t downsample_factor = 1;
  // id -> frames; insertion order preserved for determinism.
  std::vector<std::pair<std::string, Tensor>> entries;

  const Tensor &by_id(const std::string &id) const;
};

void save_repr_set(const ReprSet &set, const std::string &dir);
ReprSet load_repr_set(const std::string &dir);

/// Writes content to path via a temp file and an atomic rename.
void write_file_atomic(const std::string &path, const std::string &content);

}  // namespace advasr

#endif  // ADVASR_DATA_H_
