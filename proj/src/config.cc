// src/config.cc

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

#include "advasr/config.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace advasr {

TrainConfig RunConfig::train_config(Stage stage) const {
  TrainConfig t;
  t.lambda = lambda;
  t.alpha = alpha;
  t.lr = lr;
  t.adversary_lr = adversary_lr;
  t.batch_size = batch_size;
  t.clip_norm = clip_norm;
  t.seed = sub_seed(seed, "train");
  t.stage = stage;
  switch (stage) {
    case Stage::kPretrainAsr: t.epochs = epochs_pretrain_asr; break;
    case Stage::kPretrainAdv: t.epochs = epochs_pretrain_adv; break;
    case Stage::kJoint: t.epochs = epochs_joint; break;
    case Stage::kAdvRefit: t.epochs = epochs_adv_refit; break;
  }
  return t;
}

namespace {

struct Field {
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

int64_t to_int(const std::string &key, const std::string &v) {
  try {
    size_t pos = 0;
    int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception &) {
    throw DataError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

uint64_t to_uint(const std::string &key, const std::string &v) {
  try {
    size_t pos = 0;
    uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception &) {
    throw DataError("config: key '" + key + "' expects an unsigned integer, got '" +
                    v + "'");
  }
}

double to_double(const std::string &key, const std::string &v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception &) {
    throw DataError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::map<std::string, Field> &schema() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto add_i64 = [&t](const std::string &key, auto member) {
      t[key] = {[key, member](RunConfig &c, const std::string &v) {
                  c.*member = to_int(key, v);
                },
                [member](const RunConfig &c) { return std::to_string(c.*member); }};
    };
    auto add_f64 = [&t](const std::string &key, auto member) {
      t[key] = {[key, member](RunConfig &c, const std::string &v) {
                  c.*member = to_double(key, v);
                },
                [member](const RunConfig &c) { return fmt(c.*member); }};
    };
    auto add_corpus_i64 = [&t](const std::string &key, auto member) {
      t[key] = {[key, member](RunConfig &c, const std::string &v) {
                  c.corpus.*member = to_int(key, v);
                },
                [member](const RunConfig &c) { return std::to_string(c.corpus.*member); }};
    };
    auto add_corpus_f64 = [&t](const std::string &key, auto member) {
      t[key] = {[key, member](RunConfig &c, const std::string &v) {
                  c.corpus.*member = to_double(key, v);
                },
                [member](const RunConfig &c) { return fmt(c.corpus.*member); }};
    };
    auto add_model_i64 = [&t](const std::string &key, auto member) {
      t[key] = {[key, member](RunConfig &c, const std::string &v) {
                  c.model.*member = to_int(key, v);
                },
                [member](const RunConfig &c) { return std::to_string(c.model.*member); }};
    };

    t["run.seed"] = {[](RunConfig &c, const std::string &v) {
                       c.seed = to_uint("run.seed", v);
                     },
                     [](const RunConfig &c) { return std::to_string(c.seed); }};

    add_corpus_i64("corpus.num_speakers", &CorpusConfig::num_speakers);
    add_corpus_i64("corpus.utts_per_speaker", &CorpusConfig::utts_per_speaker);
    t["corpus.vocab"] = {[](RunConfig &c, const std::string &v) { c.corpus.vocab = v; },
                         [](const RunConfig &c) { return c.corpus.vocab; }};
    add_corpus_i64("corpus.feature_dim", &CorpusConfig::feature_dim);
    add_corpus_i64("corpus.min_symbols", &CorpusConfig::min_symbols);
    add_corpus_i64("corpus.max_symbols", &CorpusConfig::max_symbols);
    add_corpus_i64("corpus.min_seg_frames", &CorpusConfig::min_seg_frames);
    add_corpus_i64("corpus.max_seg_frames", &CorpusConfig::max_seg_frames);
    add_corpus_f64("corpus.noise", &CorpusConfig::noise);
    add_corpus_f64("corpus.speaker_strength", &CorpusConfig::speaker_strength);
    add_i64("corpus.open_speakers", &RunConfig::open_speakers);

    add_model_i64("model.feature_dim", &ModelConfig::feature_dim);
    add_model_i64("model.encoder_hidden", &ModelConfig::encoder_hidden);
    add_model_i64("model.encoder_layers", &ModelConfig::encoder_layers);
    add_model_i64("model.downsample_factor", &ModelConfig::downsample_factor);
    add_model_i64("model.attn_hidden", &ModelConfig::attn_hidden);
    add_model_i64("model.attn_dim", &ModelConfig::attn_dim);
    add_model_i64("model.attn_channels", &ModelConfig::attn_channels);
    add_model_i64("model.attn_width", &ModelConfig::attn_width);
    add_model_i64("model.attn_embed_dim", &ModelConfig::attn_embed_dim);
    add_model_i64("model.adversary_hidden", &ModelConfig::adversary_hidden);
    add_model_i64("model.adversary_layers", &ModelConfig::adversary_layers);

    add_f64("train.lambda", &RunConfig::lambda);
    add_f64("train.alpha", &RunConfig::alpha);
    add_f64("train.lr", &RunConfig::lr);
    add_f64("train.adversary_lr", &RunConfig::adversary_lr);
    add_i64("train.batch_size", &RunConfig::batch_size);
    add_f64("train.clip_norm", &RunConfig::clip_norm);
    add_i64("train.epochs_pretrain_asr", &RunConfig::epochs_pretrain_asr);
    add_i64("train.epochs_pretrain_adv", &RunConfig::epochs_pretrain_adv);
    add_i64("train.epochs_joint", &RunConfig::epochs_joint);
    add_i64("train.epochs_adv_refit", &RunConfig::epochs_adv_refit);

    t["eval.backend"] = {[](RunConfig &c, const std::string &v) {
                           if (v != "cosine" && v != "plda" && v != "both")
                             throw DataError(
                                 "config: eval.backend must be cosine, plda or both");
                           c.eval_backend = v;
                         },
                         [](const RunConfig &c) { return c.eval_backend; }};
    add_i64("eval.enroll_frames", &RunConfig::enroll_frames);
    add_i64("eval.embed_hidden", &RunConfig::embed_hidden);
    add_i64("eval.embed_dim", &RunConfig::embed_dim);
    add_i64("eval.embed_epochs", &RunConfig::embed_epochs);
    add_f64("eval.embed_lr", &RunConfig::embed_lr);
    add_i64("eval.embed_batch", &RunConfig::embed_batch);
    add_i64("eval.attacker_epochs", &RunConfig::attacker_epochs);
    add_f64("eval.attacker_lr", &RunConfig::attacker_lr);
    add_i64("eval.plda_iterations", &RunConfig::plda_iterations);
    add_i64("eval.beam_size", &RunConfig::beam_size);
    add_i64("eval.max_decode_len", &RunConfig::max_decode_len);

    return t;
  }();
  return table;
}

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config_text(const std::string &text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DataError(str_cat("config: malformed section header at line ", line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(str_cat("config: expected key = value at line ", line_no));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw DataError("config: key '" + key + "' appears before any [section]");
    apply_override(config, section + "." + key + "=" + value);
  }
  return config;
}

RunConfig parse_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

void apply_override(RunConfig &config, const std::string &assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw DataError("config: override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  auto it = schema().find(key);
  if (it == schema().end())
    throw DataError("config: unknown key '" + key + "'");
  it->second.set(config, value);
}

std::string render_config(const RunConfig &config) {
  std::string out;
  std::string current;
  for (const auto &[key, field] : schema()) {
    size_t dot = key.find('.');
    std::string section = key.substr(0, dot);
    if (section != current) {
      if (!out.empty()) out += "\n";
      out += "[" + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + field.get(config) + "\n";
  }
  return out;
}

}  // namespace advasr
