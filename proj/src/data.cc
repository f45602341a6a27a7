// src/data.cc

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

#include "advasr/data.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

namespace advasr {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian");

namespace {
constexpr char kBlobMagic[9] = "ADVASRB1";
constexpr const char *kCorpusMagic = "advasr-corpus";
constexpr const char *kReprMagic = "advasr-repr";

std::string utt_name(int64_t speaker, int64_t utt) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%03d_utt%03d", static_cast<int>(speaker),
                static_cast<int>(utt));
  return buf;
}

std::string spk_name(int64_t speaker) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", static_cast<int>(speaker));
  return buf;
}
}  // namespace

void CorpusConfig::validate() const {
  if (num_speakers < 4) throw DataError("corpus: need at least 4 speakers");
  if (speaker_strength < 0) throw DataError("corpus: speaker_strength < 0");
  if (utts_per_speaker < 1) throw DataError("corpus: utts_per_speaker < 1");
  if (feature_dim < 1) throw DataError("corpus: feature_dim < 1");
  if (min_symbols < 1 || max_symbols < min_symbols)
    throw DataError("corpus: bad symbol count range");
  if (min_seg_frames < 1 || max_seg_frames < min_seg_frames)
    throw DataError("corpus: bad segment length range");
  if (vocab.empty()) throw DataError("corpus: empty vocab");
  if (static_cast<int64_t>(vocab.size()) < 2)
    throw DataError("corpus: vocab too small for requested transcripts");
  if (max_symbols > max_chars) throw DataError("corpus: max_symbols over cap");
}

std::vector<const Utterance *> Corpus::split(const std::string &name) const {
  std::vector<const Utterance *> out;
  for (const auto &u : utterances)
    if (u.split == name) out.push_back(&u);
  if (out.empty())
    throw DataError("corpus: no utterances in split '" + name + "'");
  return out;
}

std::vector<std::string> Corpus::speakers_in(const std::string &split_name) const {
  std::set<std::string> seen;
  for (const auto &u : utterances)
    if (u.split == split_name) seen.insert(u.speaker_id);
  return {seen.begin(), seen.end()};
}

SpeakerTable Corpus::closed_speaker_table() const {
  return SpeakerTable(speakers_in("train-adv"));
}

const Utterance &Corpus::by_id(const std::string &id) const {
  for (const auto &u : utterances)
    if (u.id == id) return u;
  throw DataError("corpus: unknown utterance '" + id + "'");
}

Corpus generate_synthetic_corpus(const CorpusConfig &config) {
  config.validate();
  const int64_t f_dim = config.feature_dim;

  // Per-symbol content templates, shared by all speakers.
  std::mt19937_64 template_rng(sub_seed(config.seed, "templates"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::map<char, std::vector<double>> templates;
  for (char c : config.vocab) {
    std::vector<double> t(static_cast<size_t>(f_dim));
    for (auto &v : t) v = normal(template_rng);
    templates[c] = t;
  }

  // Spectral ramp used by the per-speaker tilt term.
  std::vector<double> ramp(static_cast<size_t>(f_dim));
  for (int64_t k = 0; k < f_dim; ++k)
    ramp[static_cast<size_t>(k)] =
        f_dim == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(f_dim - 1);

  Corpus corpus;
  corpus.config = config;

  for (int64_t s = 0; s < config.num_speakers; ++s) {
    const std::string speaker = spk_name(s);
    std::mt19937_64 channel_rng(sub_seed(config.seed, "channel/" + speaker));
    std::vector<double> offset(static_cast<size_t>(f_dim)), gain(static_cast<size_t>(f_dim));
    for (int64_t k = 0; k < f_dim; ++k) {
      offset[static_cast<size_t>(k)] = 0.5 * normal(channel_rng);
      gain[static_cast<size_t>(k)] =
          1.0 + config.speaker_strength * 0.25 *
                    std::uniform_real_distribution<double>(-1.0, 1.0)(channel_rng);
    }
    double tilt = std::uniform_real_distribution<double>(-1.0, 1.0)(channel_rng);

    for (int64_t uidx = 0; uidx < config.utts_per_speaker; ++uidx) {
      Utterance u;
      u.id = utt_name(s, uidx);
      u.speaker_id = speaker;
      u.group = (s % 2 == 0) ? "A" : "B";
      std::mt19937_64 rng(sub_seed(config.seed, "utt/" + u.id));

      std::uniform_int_distribution<int64_t> m_dist(config.min_symbols, config.max_symbols);
      std::uniform_int_distribution<int64_t> seg_dist(config.min_seg_frames,
                                                      config.max_seg_frames);
      std::uniform_int_distribution<size_t> sym_dist(0, config.vocab.size() - 1);

      int64_t m = std::min(m_dist(rng), config.max_chars);
      std::vector<int64_t> seg_len;
      int64_t t_total = 0;
      for (int64_t i = 0; i < m; ++i) {
        u.transcript.push_back(config.vocab[sym_dist(rng)]);
        seg_len.push_back(seg_dist(rng));
        t_total += seg_len.back();
      }

      // Repeated characters need a separating blank after decimation; grow
      // segments round-robin until the alignment fits.
      int64_t need = m;
      for (size_t i = 1; i < u.transcript.size(); ++i)
        if (u.transcript[i] == u.transcript[i - 1]) ++need;
      for (size_t grow = 0;
           (t_total + config.downsample_factor - 1) / config.downsample_factor < need;
           ++grow) {
        seg_len[grow % seg_len.size()] += config.downsample_factor;
        t_total += config.downsample_factor;
      }
      if (t_total > config.max_frames)
        throw DataError("corpus: generated utterance exceeds the frame cap");

      u.features = Tensor({t_total, f_dim});
      int64_t t = 0;
      for (int64_t i = 0; i < m; ++i) {
        const auto &tpl = templates[u.transcript[static_cast<size_t>(i)]];
        for (int64_t j = 0; j < seg_len[static_cast<size_t>(i)]; ++j, ++t) {
          for (int64_t k = 0; k < f_dim; ++k) {
            double clean = tpl[static_cast<size_t>(k)] + config.noise * normal(rng);
            u.features.at(t, k) =
                gain[static_cast<size_t>(k)] * clean +
                config.speaker_strength *
                    (offset[static_cast<size_t>(k)] + tilt * ramp[static_cast<size_t>(k)]);
          }
        }
      }

      corpus.utterances.push_back(std::move(u));
    }
  }
  return corpus;
}

void make_splits(Corpus &corpus, const SplitScheme &scheme) {
  std::set<std::string> speaker_set;
  for (const auto &u : corpus.utterances) speaker_set.insert(u.speaker_id);
  std::vector<std::string> speakers(speaker_set.begin(), speaker_set.end());

  if (scheme.open_speakers < 0 ||
      scheme.open_speakers >= static_cast<int64_t>(speakers.size()))
    throw DataError("splits: open speaker count leaves no closed-set speakers");
  int64_t closed = static_cast<int64_t>(speakers.size()) - scheme.open_speakers;

  std::map<std::string, std::vector<Utterance *>> by_speaker;
  for (auto &u : corpus.utterances) by_speaker[u.speaker_id].push_back(&u);

  int64_t per_speaker_min = scheme.test_per_speaker + scheme.dev_per_speaker + 1;
  std::mt19937_64 rng(sub_seed(corpus.config.seed, "splits"));
  for (int64_t s = 0; s < static_cast<int64_t>(speakers.size()); ++s) {
    auto &utts = by_speaker[speakers[static_cast<size_t>(s)]];
    if (s >= closed) {
      for (auto *u : utts) u->split = "open";
      continue;
    }
    if (static_cast<int64_t>(utts.size()) < per_speaker_min)
      throw DataError(str_cat("splits: speaker ", speakers[static_cast<size_t>(s)],
                              " has ", utts.size(), " utterances, needs ",
                              per_speaker_min));
    std::vector<size_t> order(utts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < order.size(); ++i) {
      Utterance *u = utts[order[i]];
      if (static_cast<int64_t>(i) < scheme.test_per_speaker)
        u->split = "test-adv";
      else if (static_cast<int64_t>(i) < scheme.test_per_speaker + scheme.dev_per_speaker)
        u->split = "dev-adv";
      else
        u->split = "train-adv";
    }
  }
}

TrialSet build_trials(const Corpus &corpus, const std::string &split_name,
                      int64_t enroll_budget_frames, uint64_t seed) {
  auto pool = corpus.split(split_name);
  std::map<std::string, std::vector<const Utterance *>> by_speaker;
  for (const auto *u : pool) by_speaker[u->speaker_id].push_back(u);
  if (by_speaker.size() < 2)
    throw DataError("trials: need at least 2 open-set speakers");

  TrialSet set;
  std::mt19937_64 rng(sub_seed(seed, "trials"));
  for (auto &[speaker, utts] : by_speaker) {
    std::vector<size_t> order(utts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::string> enrolled;
    std::vector<const Utterance *> rest;
    int64_t frames = 0;
    for (size_t i : order) {
      if (frames < enroll_budget_frames) {
        enrolled.push_back(utts[i]->id);
        frames += utts[i]->features.rows();
      } else {
        rest.push_back(utts[i]);
      }
    }
    if (frames < enroll_budget_frames || rest.empty()) {
      set.excluded_speakers.push_back(speaker);
      continue;
    }
    set.enrollment[speaker] = std::move(enrolled);
    for (const auto *u : rest) set.test_utterances.push_back(u->id);
  }
  if (set.enrollment.size() < 2)
    throw DataError("trials: fewer than 2 speakers meet the enrollment budget");

  std::sort(set.test_utterances.begin(), set.test_utterances.end());
  for (const auto &[speaker, utts] : set.enrollment) {
    (void)utts;
    for (const auto &test_id : set.test_utterances)
      set.trials.push_back(
          {speaker, test_id, corpus.by_id(test_id).speaker_id == speaker});
  }
  return set;
}

std::vector<Batch> make_batches(const std::vector<const Utterance *> &utts,
                                int64_t max_batch) {
  if (max_batch < 1) throw DataError("batch: max_batch < 1");
  std::vector<const Utterance *> sorted = utts;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Utterance *a, const Utterance *b) {
                     if (a->features.rows() != b->features.rows())
                       return a->features.rows() < b->features.rows();
                     return a->id < b->id;
                   });
  std::vector<Batch> batches;
  for (size_t start = 0; start < sorted.size(); start += static_cast<size_t>(max_batch)) {
    Batch batch;
    size_t end = std::min(sorted.size(), start + static_cast<size_t>(max_batch));
    int64_t t_max = 0;
    for (size_t i = start; i < end; ++i)
      t_max = std::max(t_max, sorted[i]->features.rows());
    for (size_t i = start; i < end; ++i) {
      const Utterance *u = sorted[i];
      int64_t t_len = u->features.rows(), f_dim = u->features.cols();
      Tensor padded({t_max, f_dim});
      std::copy(u->features.data(), u->features.data() + u->features.numel(),
                padded.data());
      Mask mask(static_cast<size_t>(t_max), 0);
      std::fill(mask.begin(), mask.begin() + static_cast<size_t>(t_len), 1);
      batch.members.push_back(u);
      batch.features.push_back(std::move(padded));
      batch.masks.push_back(std::move(mask));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

// -- Serialization ------------------------------------------------------------

void write_file_atomic(const std::string &path, const std::string &content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp);
  }
  fs::rename(tmp, path);
}

namespace {

std::string blob_of(const std::vector<const Tensor *> &mats,
                    std::vector<int64_t> &offsets) {
  std::string blob(kBlobMagic, 8);
  for (const auto *m : mats) {
    offsets.push_back(static_cast<int64_t>(blob.size()));
    blob.append(reinterpret_cast<const char *>(m->data()),
                static_cast<size_t>(m->numel()) * sizeof(double));
  }
  return blob;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

Tensor matrix_from_blob(const std::string &blob, int64_t offset, int64_t rows,
                        int64_t cols) {
  int64_t bytes = rows * cols * static_cast<int64_t>(sizeof(double));
  if (offset < 8 || offset + bytes > static_cast<int64_t>(blob.size()))
    throw DataError("blob: offset out of range");
  Tensor t({rows, cols});
  std::copy(blob.data() + offset, blob.data() + offset + bytes,
            reinterpret_cast<char *>(t.data()));
  return t;
}

void check_blob_magic(const std::string &blob) {
  if (blob.size() < 8 || blob.compare(0, 8, kBlobMagic, 8) != 0)
    throw DataError("blob: bad magic");
}

json parse_line(const std::string &line, const std::string &what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw DataError("manifest: malformed " + what);
  return j;
}

}  // namespace

void save_corpus(const Corpus &corpus, const std::string &dir) {
  fs::create_directories(dir);

  std::vector<const Tensor *> mats;
  for (const auto &u : corpus.utterances) mats.push_back(&u.features);
  std::vector<int64_t> offsets;
  std::string blob = blob_of(mats, offsets);

  const CorpusConfig &c = corpus.config;
  json header{{"magic", kCorpusMagic},
              {"version", 1},
              {"count", corpus.utterances.size()},
              {"feature_dim", c.feature_dim},
              {"vocab", c.vocab},
              {"downsample_factor", c.downsample_factor},
              {"num_speakers", c.num_speakers},
              {"utts_per_speaker", c.utts_per_speaker},
              {"speaker_strength", c.speaker_strength},
              {"noise", c.noise},
              {"seed", c.seed}};
  std::string manifest = header.dump() + "\n";
  for (size_t i = 0; i < corpus.utterances.size(); ++i) {
    const Utterance &u = corpus.utterances[i];
    json rec{{"id", u.id},
             {"speaker", u.speaker_id},
             {"group", u.group},
             {"transcript", u.transcript},
             {"frames", u.features.rows()},
             {"offset", offsets[i]},
             {"split", u.split}};
    manifest += rec.dump() + "\n";
  }
  write_file_atomic(dir + "/manifest.jsonl", manifest);
  write_file_atomic(dir + "/features.blob", blob);
}

Corpus load_corpus(const std::string &dir) {
  std::ifstream in(dir + "/manifest.jsonl");
  if (!in) throw DataError("cannot read " + dir + "/manifest.jsonl");
  std::string blob = read_file(dir + "/features.blob");
  check_blob_magic(blob);

  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest: empty file");
  json header = parse_line(line, "header");
  if (header.value("magic", "") != kCorpusMagic)
    throw DataError("manifest: bad magic");
  if (header.value("version", 0) != 1)
    throw DataError("manifest: unsupported version");

  Corpus corpus;
  CorpusConfig &c = corpus.config;
  c.feature_dim = header.at("feature_dim").get<int64_t>();
  c.vocab = header.at("vocab").get<std::string>();
  c.downsample_factor = header.at("downsample_factor").get<int64_t>();
  c.num_speakers = header.at("num_speakers").get<int64_t>();
  c.utts_per_speaker = header.at("utts_per_speaker").get<int64_t>();
  c.speaker_strength = header.at("speaker_strength").get<double>();
  c.noise = header.at("noise").get<double>();
  c.seed = header.at("seed").get<uint64_t>();

  Vocab vocab = corpus.vocab();
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = parse_line(line, "record");
    Utterance u;
    u.id = rec.at("id").get<std::string>();
    u.speaker_id = rec.at("speaker").get<std::string>();
    u.group = rec.at("group").get<std::string>();
    u.transcript = rec.at("transcript").get<std::string>();
    u.split = rec.at("split").get<std::string>();
    int64_t frames = rec.at("frames").get<int64_t>();
    if (frames < 1) throw DataError("manifest: utterance with no frames");
    u.features = matrix_from_blob(blob, rec.at("offset").get<int64_t>(), frames,
                                  c.feature_dim);
    if (!ids.insert(u.id).second)
      throw DataError("manifest: duplicate utterance id " + u.id);

    // Invariants checked at load: transcript symbols and CTC feasibility.
    auto targets = vocab.ctc_targets(u.transcript);
    int64_t t_sub = (frames + c.downsample_factor - 1) / c.downsample_factor;
    if (ctc_min_frames(targets) > t_sub)
      throw DataError("manifest: utterance " + u.id +
                      " too short for its transcript under downsampling");
    corpus.utterances.push_back(std::move(u));
  }
  if (corpus.utterances.size() != header.at("count").get<size_t>())
    throw DataError("manifest: count mismatch");
  return corpus;
}

const Tensor &ReprSet::by_id(const std::string &id) const {
  for (const auto &[eid, t] : entries)
    if (eid == id) return t;
  throw DataError("repr set: unknown utterance '" + id + "'");
}

void save_repr_set(const ReprSet &set, const std::string &dir) {
  fs::create_directories(dir);
  std::vector<const Tensor *> mats;
  for (const auto &[id, t] : set.entries) {
    (void)id;
    mats.push_back(&t);
  }
  std::vector<int64_t> offsets;
  std::string blob = blob_of(mats, offsets);

  json header{{"magic", kReprMagic},
              {"version", 1},
              {"count", set.entries.size()},
              {"dim", set.dim},
              {"downsample_factor", set.downsample_factor}};
  std::string manifest = header.dump() + "\n";
  for (size_t i = 0; i < set.entries.size(); ++i) {
    json rec{{"id", set.entries[i].first},
             {"frames", set.entries[i].second.rows()},
             {"offset", offsets[i]}};
    manifest += rec.dump() + "\n";
  }
  write_file_atomic(dir + "/repr.jsonl", manifest);
  write_file_atomic(dir + "/repr.blob", blob);
}

ReprSet load_repr_set(const std::string &dir) {
  std::ifstream in(dir + "/repr.jsonl");
  if (!in) throw DataError("cannot read " + dir + "/repr.jsonl");
  std::string blob = read_file(dir + "/repr.blob");
  check_blob_magic(blob);

  std::string line;
  if (!std::getline(in, line)) throw DataError("repr manifest: empty file");
  json header = parse_line(line, "header");
  if (header.value("magic", "") != kReprMagic)
    throw DataError("repr manifest: bad magic");
  if (header.value("version", 0) != 1)
    throw DataError("repr manifest: unsupported version");

  ReprSet set;
  set.dim = header.at("dim").get<int64_t>();
  set.downsample_factor = header.at("downsample_factor").get<int64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = parse_line(line, "record");
    int64_t frames = rec.at("frames").get<int64_t>();
    set.entries.emplace_back(
        rec.at("id").get<std::string>(),
        matrix_from_blob(blob, rec.at("offset").get<int64_t>(), frames, set.dim));
  }
  if (set.entries.size() != header.at("count").get<size_t>())
    throw DataError("repr manifest: count mismatch");
  return set;
}

}  // namespace advasr
