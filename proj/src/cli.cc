// src/cli.cc

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

#include "advasr/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "advasr/asr-eval.h"
#include "advasr/config.h"
#include "advasr/speaker-eval.h"
#include "advasr/trainer.h"

namespace advasr {

namespace fs = std::filesystem;

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// -- Common run setup ---------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
};

void add_common(CLI::App *cmd, CommonArgs &args) {
  cmd->add_option("--config", args.config_path, "Config file (INI sections)");
  cmd->add_option("--set", args.overrides,
                  "Override a config key, e.g. --set train.alpha=0.5");
  cmd->add_option("--seed", args.seed, "Master seed (overrides run.seed)");
}

RunConfig resolve_config(const CommonArgs &args) {
  RunConfig config =
      args.config_path.empty() ? RunConfig() : parse_config_file(args.config_path);
  for (const auto &assignment : args.overrides) apply_override(config, assignment);
  if (args.seed) config.seed = *args.seed;
  return config;
}

CorpusConfig effective_corpus_config(const RunConfig &config) {
  CorpusConfig c = config.corpus;
  c.seed = sub_seed(config.seed, "corpus");
  c.downsample_factor = config.model.downsample_factor;
  return c;
}

void emit_run_metadata(const std::string &dir, const RunConfig &config) {
  fs::create_directories(dir);
  write_file_atomic(dir + "/effective-config.ini", render_config(config));
  write_file_atomic(dir + "/seed.txt", std::to_string(config.seed) + "\n");
}

Model fresh_model(const RunConfig &config, const Corpus &corpus) {
  ModelConfig mc = config.model;
  if (mc.feature_dim != corpus.config.feature_dim)
    mc.feature_dim = corpus.config.feature_dim;
  return Model(mc, corpus.vocab(), corpus.closed_speaker_table(),
               sub_seed(config.seed, "model"));
}

// -- Decoding helpers -----------------------------------------------------------

Tensor phi_values(Model &model, const Utterance &utt) {
  return model.encoder.encode(utt.features, all_valid(utt.features.rows()), utt.id)
      .frames;
}

std::string greedy_transcript(Model &model, const Utterance &utt) {
  Tape tape;
  auto [phi, mask] = model.encoder.forward(tape, utt.features,
                                           all_valid(utt.features.rows()));
  (void)mask;
  Var lp = model.ctc.log_probs(tape, phi);
  return model.vocab.string_of_ctc_ids(ctc_greedy_decode(lp->value));
}

std::string beam_transcript(Model &model, const Utterance &utt, int64_t beam,
                            int64_t max_len) {
  Tensor phi = phi_values(model, utt);
  return model.vocab.string_of_attn_ids(
      model.attention.beam_decode(phi, phi.rows(), beam, max_len));
}

// -- Representation providers -----------------------------------------------------

struct ReprProvider {
  std::string name;  // "features" or "phi"
  int64_t dim = 0;
  std::map<std::string, Tensor> frames;

  const Tensor &of(const Utterance &utt) const {
    auto it = frames.find(utt.id);
    if (it == frames.end())
      throw DataError("representation: missing utterance " + utt.id);
    return it->second;
  }
};

ReprProvider features_provider(const Corpus &corpus) {
  ReprProvider p;
  p.name = "features";
  p.dim = corpus.config.feature_dim;
  for (const auto &u : corpus.utterances) p.frames[u.id] = u.features;
  return p;
}

// Encodes every utterance, writes the repr files, then reads them back so the
// attacker consumes exactly what a decoupled service would.
ReprProvider phi_provider(Model &model, const Corpus &corpus,
                          const std::string &repr_dir) {
  ReprSet set;
  set.dim = model.encoder.output_dim();
  set.downsample_factor = model.cfg.downsample_factor;
  for (const auto &u : corpus.utterances)
    set.entries.emplace_back(u.id, phi_values(model, u));
  save_repr_set(set, repr_dir);

  ReprSet loaded = load_repr_set(repr_dir);
  ReprProvider p;
  p.name = "phi";
  p.dim = loaded.dim;
  for (auto &[id, frames] : loaded.entries) p.frames[id] = std::move(frames);
  return p;
}

// -- Attacker (closed set) ---------------------------------------------------------

Adversary train_attacker(const ReprProvider &repr,
                         const std::vector<const Utterance *> &train,
                         const SpeakerTable &speakers, const RunConfig &config,
                         const std::string &seed_tag) {
  std::mt19937_64 init_rng(sub_seed(config.seed, "attacker-init/" + seed_tag));
  Adversary attacker("attacker",
                     {.input_dim = repr.dim,
                      .hidden_dim = config.model.adversary_hidden,
                      .num_layers = config.model.adversary_layers,
                      .num_speakers = speakers.size()},
                     init_rng);
  std::vector<Param *> params;
  attacker.visit([&params](Param &p) { params.push_back(&p); });
  AdamOptimizer opt({.lr = config.attacker_lr, .clip_norm = config.clip_norm});

  std::mt19937_64 shuffle_rng(sub_seed(config.seed, "attacker-shuffle/" + seed_tag));
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int64_t epoch = 0; epoch < config.attacker_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      Tape tape;
      std::vector<Var> terms;
      for (size_t i = start; i < end; ++i) {
        const Utterance &utt = *train[order[i]];
        const Tensor &x = repr.of(utt);
        Var lp = attacker.forward(tape, make_const(x), all_valid(x.rows()));
        terms.push_back(adversary_loss(lp, speakers.class_of(utt.speaker_id),
                                       all_valid(x.rows())));
      }
      Var loss = scale(sum(stack_scalars(terms)),
                       1.0 / static_cast<double>(terms.size()));
      backward(loss);
      tape.accumulate_param_grads();
      opt.step(params);
    }
  }
  return attacker;
}

double attacker_accuracy(Adversary &attacker, const ReprProvider &repr,
                         const std::vector<const Utterance *> &test,
                         const SpeakerTable &speakers) {
  std::vector<int64_t> decisions, labels;
  for (const auto *u : test) {
    const Tensor &x = repr.of(*u);
    Tape tape;
    Var lp = attacker.forward(tape, make_const(x), all_valid(x.rows()));
    decisions.push_back(
        utterance_speaker_decision(lp->value, all_valid(x.rows())).first);
    labels.push_back(speakers.class_of(u->speaker_id));
  }
  return closed_set_accuracy(decisions, labels);
}

// -- Open-set evaluation ------------------------------------------------------------

struct OpenSetMetrics {
  double eer_pooled = 0.0;
  std::map<std::string, double> eer_by_group;
  double silhouette = 0.0;
  std::string scores_csv;
  std::vector<Embedding> trial_embeddings;
};

OpenSetMetrics open_set_eval(const ReprProvider &repr, const Corpus &corpus,
                             const RunConfig &config, const std::string &backend,
                             const std::string &seed_tag) {
  auto train = corpus.split("train-adv");

  EmbeddingNetConfig ec;
  ec.input_dim = repr.dim;
  ec.frame_hidden = config.embed_hidden;
  ec.embed_dim = config.embed_dim;
  ec.lr = config.embed_lr;
  ec.epochs = config.embed_epochs;
  ec.batch_size = config.embed_batch;
  ec.seed = sub_seed(config.seed, "embed/" + seed_tag);

  std::vector<SeqExample> examples;
  examples.reserve(train.size());
  for (const auto *u : train) {
    const Tensor &x = repr.of(*u);
    examples.push_back({&x, all_valid(x.rows()), u->speaker_id, u->id});
  }
  EmbeddingNet net = train_embedding_net(examples, ec);

  TrialSet trials =
      build_trials(corpus, "open", config.enroll_frames, sub_seed(config.seed, "trials"));

  auto embed_of = [&](const std::string &utt_id) {
    const Utterance &u = corpus.by_id(utt_id);
    const Tensor &x = repr.of(u);
    return net.extract(x, all_valid(x.rows()), u.id, u.speaker_id);
  };

  std::map<std::string, Embedding> enroll_models;
  for (const auto &[speaker, utts] : trials.enrollment) {
    std::vector<Embedding> embs;
    for (const auto &id : utts) embs.push_back(embed_of(id));
    enroll_models[speaker] = enroll(embs);
  }
  std::map<std::string, Embedding> test_embs;
  OpenSetMetrics metrics;
  for (const auto &id : trials.test_utterances) {
    test_embs[id] = embed_of(id);
    metrics.trial_embeddings.push_back(test_embs[id]);
  }

  PldaModel plda;
  if (backend != "cosine") {
    std::vector<Embedding> plda_train_set;
    for (const auto &ex : examples)
      plda_train_set.push_back(length_normalize(
          net.extract(*ex.features, ex.mask, ex.utterance_id, ex.speaker_id)));
    plda = plda_train(plda_train_set, config.plda_iterations);
  }

  auto group_of = [&corpus](const std::string &speaker) -> std::string {
    for (const auto &u : corpus.utterances)
      if (u.speaker_id == speaker) return u.group;
    throw DataError("open-set eval: unknown speaker " + speaker);
  };

  std::vector<double> genuine, impostor;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_group;
  std::ostringstream csv;
  csv << "enroll_id,test_utt_id,score,is_genuine\n";
  for (const auto &trial : trials.trials) {
    const Embedding &model_emb = enroll_models.at(trial.enroll_speaker);
    const Embedding &test_emb = test_embs.at(trial.test_utterance);
    double score;
    if (backend == "cosine") {
      score = cosine_score(model_emb, test_emb);
    } else {
      score = plda_score(plda, model_emb, length_normalize(test_emb));
    }
    csv << trial.enroll_speaker << "," << trial.test_utterance << ","
        << fmt_num(score) << "," << (trial.genuine ? 1 : 0) << "\n";
    (trial.genuine ? genuine : impostor).push_back(score);

    std::string eg = group_of(trial.enroll_speaker);
    std::string tg = corpus.by_id(trial.test_utterance).group;
    if (eg == tg) {
      auto &bucket = by_group[eg];
      (trial.genuine ? bucket.first : bucket.second).push_back(score);
    }
  }
  metrics.scores_csv = csv.str();
  metrics.eer_pooled = 100.0 * eer(genuine, impostor).eer;
  for (auto &[group, scores] : by_group) {
    if (scores.first.empty() || scores.second.empty()) continue;
    metrics.eer_by_group[group] = 100.0 * eer(scores.first, scores.second).eer;
  }

  std::vector<std::vector<double>> points;
  std::vector<int64_t> labels;
  std::map<std::string, int64_t> label_of;
  for (const auto &e : metrics.trial_embeddings) {
    if (!label_of.count(e.speaker_id))
      label_of[e.speaker_id] = static_cast<int64_t>(label_of.size());
    points.push_back(e.vec);
    labels.push_back(label_of[e.speaker_id]);
  }
  metrics.silhouette = silhouette_cosine(points, labels);
  return metrics;
}

// -- Commands -------------------------------------------------------------------------

int cmd_synth_data(const CommonArgs &common, const std::string &out_dir,
                   std::ostream &out) {
  RunConfig config = resolve_config(common);
  Corpus corpus = generate_synthetic_corpus(effective_corpus_config(config));
  make_splits(corpus, {.open_speakers = config.open_speakers});
  save_corpus(corpus, out_dir);
  emit_run_metadata(out_dir, config);

  std::map<std::string, int64_t> counts;
  for (const auto &u : corpus.utterances) counts[u.split] += 1;
  out << "corpus " << out_dir << ": " << corpus.utterances.size() << " utterances";
  for (const auto &[split, n] : counts) out << ", " << split << "=" << n;
  out << "\n";
  return 0;
}

int cmd_train(const CommonArgs &common, const std::string &corpus_dir,
              const std::string &stage_str, const std::string &resume,
              std::optional<double> alpha_flag, const std::string &out_dir,
              std::ostream &out) {
  RunConfig config = resolve_config(common);
  if (alpha_flag) config.alpha = *alpha_flag;
  Stage stage = stage_from_name(stage_str);

  Corpus corpus = load_corpus(corpus_dir);
  Model model;
  if (resume.empty()) {
    if (stage != Stage::kPretrainAsr)
      throw DataError("train: --stage " + stage_str +
                      " requires --resume with an existing checkpoint");
    model = fresh_model(config, corpus);
  } else {
    LoadedCheckpoint ckpt = load_checkpoint(resume);
    if (stage_order(stage) != stage_order(ckpt.last_completed) + 1)
      throw DataError("train: stage '" + stage_str + "' cannot follow '" +
                      stage_name(ckpt.last_completed) + "'");
    if (ckpt.model.vocab.to_string() != corpus.vocab().to_string())
      throw DataError("train: checkpoint vocabulary differs from the corpus");
    model = std::move(ckpt.model);
  }

  TrainConfig tc = config.train_config(stage);
  auto log = run_stage(model, tc, corpus.split("train-adv"));

  fs::create_directories(out_dir);
  save_checkpoint(out_dir + "/checkpoint.bin", model, tc, stage);
  write_file_atomic(out_dir + "/loss.csv", loss_log_csv(log));
  emit_run_metadata(out_dir, config);

  out << "stage " << stage_name(stage) << ": " << log.size() << " epochs";
  if (!log.empty()) out << ", final objective " << fmt_num(log.back().objective);
  out << "\n";
  return 0;
}

int cmd_decode(const CommonArgs &common, const std::string &corpus_dir,
               const std::string &checkpoint, const std::string &split,
               const std::string &decoder, const std::string &out_dir,
               std::ostream &out) {
  RunConfig config = resolve_config(common);
  Corpus corpus = load_corpus(corpus_dir);
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint);

  std::vector<std::string> ids, refs, hyps;
  for (const auto *u : corpus.split(split)) {
    ids.push_back(u->id);
    refs.push_back(u->transcript);
    if (decoder == "ctc-greedy")
      hyps.push_back(greedy_transcript(ckpt.model, *u));
    else if (decoder == "attn-beam")
      hyps.push_back(beam_transcript(ckpt.model, *u, config.beam_size,
                                     config.max_decode_len));
    else
      throw DataError("decode: unknown decoder '" + decoder + "'");
  }

  fs::create_directories(out_dir);
  write_file_atomic(out_dir + "/decode.csv", scoring_report_csv(ids, refs, hyps));
  emit_run_metadata(out_dir, config);

  out << "decoded " << ids.size() << " utterances (" << decoder
      << "): WER " << fmt_num(wer_strings(refs, hyps)) << ", CER "
      << fmt_num(cer(refs, hyps)) << "\n";
  return 0;
}

int cmd_eval(const CommonArgs &common, const std::string &corpus_dir,
             const std::string &checkpoint, const std::string &representation,
             const std::string &metrics_str, const std::string &out_dir,
             std::ostream &out, std::ostream &err) {
  RunConfig config = resolve_config(common);
  Corpus corpus = load_corpus(corpus_dir);

  std::set<std::string> metrics;
  {
    std::istringstream in(metrics_str);
    std::string m;
    while (std::getline(in, m, ',')) {
      if (m != "wer" && m != "acc" && m != "eer" && m != "silhouette")
        throw DataError("eval: unknown metric '" + m + "'");
      metrics.insert(m);
    }
    if (metrics.empty()) throw DataError("eval: no metrics requested");
  }
  if (representation != "features" && representation != "phi")
    throw DataError("eval: representation must be 'features' or 'phi'");

  std::optional<LoadedCheckpoint> ckpt;
  if (!checkpoint.empty()) ckpt = load_checkpoint(checkpoint);
  if (representation == "phi" && !ckpt)
    throw DataError("eval: --representation phi requires --checkpoint");

  fs::create_directories(out_dir);

  ReprProvider repr = representation == "features"
                          ? features_provider(corpus)
                          : phi_provider(ckpt->model, corpus, out_dir + "/repr");

  std::string label = representation == "features"
                          ? "features"
                          : "phi_" + fmt_num(ckpt->config.alpha);
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("representation", label);
  rows.emplace_back("alpha",
                    representation == "features" ? "-" : fmt_num(ckpt->config.alpha));

  if (metrics.count("wer")) {
    if (!ckpt) {
      err << "eval: skipping wer, raw features have no decoder\n";
    } else {
      std::vector<std::string> ids, refs, hyps;
      for (const auto *u : corpus.split("test-adv")) {
        ids.push_back(u->id);
        refs.push_back(u->transcript);
        hyps.push_back(greedy_transcript(ckpt->model, *u));
      }
      write_file_atomic(out_dir + "/decode.csv", scoring_report_csv(ids, refs, hyps));
      rows.emplace_back("wer", fmt_num(wer_strings(refs, hyps)));
      rows.emplace_back("cer", fmt_num(cer(refs, hyps)));
    }
  }

  if (metrics.count("acc")) {
    auto test = corpus.split("test-adv");
    SpeakerTable speakers = corpus.closed_speaker_table();
    double acc;
    if (representation == "phi") {
      // The checkpoint's refit adversarial branch is the attacker.
      acc = attacker_accuracy(ckpt->model.adversary, repr, test, ckpt->model.speakers);
    } else {
      Adversary attacker = train_attacker(repr, corpus.split("train-adv"), speakers,
                                          config, representation);
      acc = attacker_accuracy(attacker, repr, test, speakers);
    }
    rows.emplace_back("acc", fmt_num(acc));
  }

  if (metrics.count("eer") || metrics.count("silhouette")) {
    std::vector<std::string> backends;
    if (config.eval_backend == "both") backends = {"cosine", "plda"};
    else backends = {config.eval_backend};
    for (const auto &backend : backends) {
      OpenSetMetrics osm =
          open_set_eval(repr, corpus, config, backend, representation + "/" + backend);
      std::string suffix = backend == "cosine" ? "" : "_plda";
      if (metrics.count("eer")) {
        write_file_atomic(out_dir + "/scores" + (suffix.empty() ? "" : suffix) + ".csv",
                          osm.scores_csv);
        rows.emplace_back("eer_pooled" + suffix, fmt_num(osm.eer_pooled));
        for (const auto &[group, value] : osm.eer_by_group)
          rows.emplace_back("eer_" + group + suffix, fmt_num(value));
      }
      if (metrics.count("silhouette") && backend == backends.front()) {
        rows.emplace_back("silhouette", fmt_num(osm.silhouette));
        save_embeddings_file(out_dir + "/embeddings.bin", osm.trial_embeddings);
      }
    }
  }

  std::string csv;
  for (const auto &[k, v] : rows) csv += k + "," + v + "\n";
  write_file_atomic(out_dir + "/report.csv", csv);
  emit_run_metadata(out_dir, config);
  out << csv;
  return 0;
}

int cmd_report(const std::vector<std::string> &eval_dirs, const std::string &out_dir,
               std::ostream &out) {
  if (eval_dirs.empty()) throw DataError("report: no eval directories given");

  struct Column {
    std::string label;
    double alpha_order = 0.0;  // features first, then ascending alpha
    bool is_features = false;
    std::map<std::string, std::string> values;
  };
  std::vector<Column> columns;
  for (const auto &dir : eval_dirs) {
    std::ifstream in(dir + "/report.csv");
    if (!in) throw DataError("report: cannot read " + dir + "/report.csv");
    Column col;
    std::string line;
    while (std::getline(in, line)) {
      size_t comma = line.find(',');
      if (comma == std::string::npos) continue;
      std::string key = line.substr(0, comma), value = line.substr(comma + 1);
      if (key == "representation") col.label = value;
      else if (key == "alpha") {
        col.is_features = value == "-";
        if (!col.is_features) col.alpha_order = std::stod(value);
      } else {
        col.values[key] = value;
      }
    }
    if (col.label.empty()) throw DataError("report: " + dir + " has no representation row");
    columns.push_back(std::move(col));
  }
  std::stable_sort(columns.begin(), columns.end(), [](const Column &a, const Column &b) {
    if (a.is_features != b.is_features) return a.is_features;
    return a.alpha_order < b.alpha_order;
  });

  const std::vector<std::pair<std::string, std::string>> known_rows = {
      {"wer", "WER"},           {"cer", "CER"},
      {"acc", "ACC"},           {"eer_pooled", "EER Pooled"},
      {"eer_A", "EER A"},       {"eer_B", "EER B"},
      {"eer_pooled_plda", "EER Pooled (PLDA)"},
      {"eer_A_plda", "EER A (PLDA)"},
      {"eer_B_plda", "EER B (PLDA)"},
      {"silhouette", "Silhouette"}};
  std::vector<std::pair<std::string, std::string>> row_keys;
  std::set<std::string> seen;
  for (const auto &[key, title] : known_rows) {
    for (const auto &col : columns)
      if (col.values.count(key)) {
        row_keys.emplace_back(key, title);
        seen.insert(key);
        break;
      }
  }
  for (const auto &col : columns)
    for (const auto &[key, value] : col.values) {
      (void)value;
      if (!seen.count(key)) {
        row_keys.emplace_back(key, key);
        seen.insert(key);
      }
    }

  std::ostringstream md, csv;
  md << "| Metric |";
  csv << "metric";
  for (const auto &col : columns) {
    md << " " << col.label << " |";
    csv << "," << col.label;
  }
  md << "\n|---|";
  csv << "\n";
  for (size_t i = 0; i < columns.size(); ++i) md << "---|";
  md << "\n";
  for (const auto &[key, title] : row_keys) {
    md << "| " << title << " |";
    csv << key;
    for (const auto &col : columns) {
      auto it = col.values.find(key);
      std::string cell = it == col.values.end() ? std::string("—") : it->second;
      md << " " << cell << " |";
      csv << "," << cell;
    }
    md << "\n";
    csv << "\n";
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file_atomic(out_dir + "/report.md", md.str());
    write_file_atomic(out_dir + "/report.csv", csv.str());
  }
  out << md.str();
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"speaker-adversarial representation workbench"};
  app.require_subcommand(1);

  CommonArgs synth_common, train_common, decode_common, eval_common;
  std::string synth_out;
  auto *synth = app.add_subcommand("synth-data", "Generate a synthetic corpus");
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "Output corpus directory")->required();

  std::string train_corpus, train_stage = "pretrain-asr", train_resume, train_out;
  std::optional<double> train_alpha;
  std::optional<int64_t> train_epochs;
  auto *train = app.add_subcommand("train", "Run one training stage");
  add_common(train, train_common);
  train->add_option("--corpus", train_corpus, "Corpus directory")->required();
  train->add_option("--stage", train_stage,
                    "pretrain-asr | pretrain-adv | joint | adv-refit");
  train->add_option("--resume", train_resume, "Checkpoint to continue from");
  train->add_option("--alpha", train_alpha, "Adversarial trade-off");
  train->add_option("--epochs", train_epochs, "Override the stage epoch count");
  train->add_option("--out", train_out, "Output directory")->required();

  std::string dec_corpus, dec_ckpt, dec_split = "test-adv", dec_decoder = "ctc-greedy",
              dec_out;
  auto *decode = app.add_subcommand("decode", "Transcribe a split and score it");
  add_common(decode, decode_common);
  decode->add_option("--corpus", dec_corpus)->required();
  decode->add_option("--checkpoint", dec_ckpt)->required();
  decode->add_option("--split", dec_split);
  decode->add_option("--decoder", dec_decoder, "ctc-greedy | attn-beam");
  decode->add_option("--out", dec_out)->required();

  std::string eval_corpus, eval_ckpt, eval_repr = "phi",
              eval_metrics = "wer,acc,eer,silhouette", eval_out;
  auto *eval = app.add_subcommand("eval", "Measure a representation");
  add_common(eval, eval_common);
  eval->add_option("--corpus", eval_corpus)->required();
  eval->add_option("--checkpoint", eval_ckpt);
  eval->add_option("--representation", eval_repr, "features | phi");
  eval->add_option("--metrics", eval_metrics, "Comma list: wer,acc,eer,silhouette");
  eval->add_option("--out", eval_out)->required();

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto *report = app.add_subcommand("report", "Merge eval outputs into one table");
  report->add_option("dirs", report_dirs, "Eval output directories");
  report->add_option("--out", report_out, "Directory for report.md / report.csv");

  try {
    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());  // CLI11 consumes from the back
    app.parse(argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(synth)) return cmd_synth_data(synth_common, synth_out, out);
    if (app.got_subcommand(train)) {
      CommonArgs common = train_common;
      if (train_epochs) {
        std::string key = "train.epochs_" + train_stage;
        std::replace(key.begin(), key.end(), '-', '_');
        common.overrides.push_back(key + "=" + std::to_string(*train_epochs));
      }
      return cmd_train(common, train_corpus, train_stage, train_resume, train_alpha,
                       train_out, out);
    }
    if (app.got_subcommand(decode))
      return cmd_decode(decode_common, dec_corpus, dec_ckpt, dec_split, dec_decoder,
                        dec_out, out);
    if (app.got_subcommand(eval))
      return cmd_eval(eval_common, eval_corpus, eval_ckpt, eval_repr, eval_metrics,
                      eval_out, out, err);
    if (app.got_subcommand(report)) return cmd_report(report_dirs, report_out, out);
    err << "usage error: no command\n";
    return 1;
  } catch (const DataError &e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError &e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError &e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace advasr
