// src/trainer.cc

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

#include "advasr/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace advasr {

using nlohmann::json;

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kPretrainAsr: return "pretrain-asr";
    case Stage::kPretrainAdv: return "pretrain-adv";
    case Stage::kJoint: return "joint";
    case Stage::kAdvRefit: return "adv-refit";
  }
  throw DataError("stage: bad enum value");
}

Stage stage_from_name(const std::string &name) {
  if (name == "pretrain-asr") return Stage::kPretrainAsr;
  if (name == "pretrain-adv") return Stage::kPretrainAdv;
  if (name == "joint") return Stage::kJoint;
  if (name == "adv-refit") return Stage::kAdvRefit;
  throw DataError("stage: unknown stage '" + name + "'");
}

int stage_order(Stage s) { return static_cast<int>(s); }

void TrainConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0)
    throw DataError(str_cat("train config: lambda ", lambda, " outside [0,1]"));
  if (alpha < 0.0)
    throw DataError(str_cat("train config: alpha ", alpha, " < 0"));
  if (lr <= 0.0 || batch_size < 1 || epochs < 0)
    throw DataError("train config: bad lr/batch/epochs");
}

Model::Model(const ModelConfig &config, const Vocab &v, const SpeakerTable &table,
             uint64_t seed)
    : cfg(config), vocab(v), speakers(table) {
  {
    std::mt19937_64 rng(sub_seed(seed, "init/encoder"));
    encoder = Encoder({.input_dim = cfg.feature_dim,
                       .hidden_dim = cfg.encoder_hidden,
                       .num_layers = cfg.encoder_layers,
                       .downsample_factor = cfg.downsample_factor},
                      rng);
  }
  {
    std::mt19937_64 rng(sub_seed(seed, "init/ctc"));
    ctc = CtcHead("ctc", encoder.output_dim(), vocab, rng);
  }
  {
    std::mt19937_64 rng(sub_seed(seed, "init/attention"));
    AttentionConfig ac;
    ac.phi_dim = encoder.output_dim();
    ac.hidden_dim = cfg.attn_hidden;
    ac.attn_dim = cfg.attn_dim;
    ac.conv_channels = cfg.attn_channels;
    ac.conv_width = cfg.attn_width;
    ac.embed_dim = cfg.attn_embed_dim;
    attention = AttentionDecoder("attention", ac, vocab, rng);
  }
  {
    std::mt19937_64 rng(sub_seed(seed, "init/adversary"));
    adversary = Adversary("adversary",
                          {.input_dim = encoder.output_dim(),
                           .hidden_dim = cfg.adversary_hidden,
                           .num_layers = cfg.adversary_layers,
                           .num_speakers = speakers.size()},
                          rng);
  }
}

std::vector<Param *> Model::group(const std::string &name) {
  std::vector<Param *> out;
  auto collect = [&out](Param &p) { out.push_back(&p); };
  if (name == "encoder") encoder.visit(collect);
  else if (name == "ctc") ctc.visit(collect);
  else if (name == "attention") attention.visit(collect);
  else if (name == "adversary") adversary.visit(collect);
  else throw DataError("model: unknown parameter group '" + name + "'");
  return out;
}

std::vector<Param *> Model::groups_for(Stage stage) {
  std::vector<Param *> out;
  auto append = [&out, this](const char *name) {
    auto g = group(name);
    out.insert(out.end(), g.begin(), g.end());
  };
  switch (stage) {
    case Stage::kPretrainAsr:
      append("encoder"); append("ctc"); append("attention");
      break;
    case Stage::kPretrainAdv:
    case Stage::kAdvRefit:
      append("adversary");
      break;
    case Stage::kJoint:
      append("encoder"); append("ctc"); append("attention"); append("adversary");
      break;
  }
  return out;
}

std::vector<Param *> Model::all_params() {
  std::vector<Param *> out;
  for (const char *name : {"encoder", "ctc", "attention", "adversary"}) {
    auto g = group(name);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

double asr_loss(double l_c, double l_a, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw DataError(str_cat("asr_loss: lambda ", lambda, " outside [0,1]"));
  return lambda * l_c + (1.0 - lambda) * l_a;
}

Var asr_loss(const Var &l_c, const Var &l_a, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw DataError(str_cat("asr_loss: lambda ", lambda, " outside [0,1]"));
  return add(scale(l_c, lambda), scale(l_a, 1.0 - lambda));
}

namespace {

Var mean_of(std::vector<Var> terms) {
  Var s = terms.size() == 1 ? terms[0] : sum(stack_scalars(terms));
  return scale(s, 1.0 / static_cast<double>(terms.size()));
}

struct BatchLosses {
  Var asr;   // null if the ASR branches were skipped
  Var spk;   // null if the adversarial branch was skipped
  double l_c = 0.0, l_a = 0.0, l_spk = 0.0;
};

BatchLosses batch_losses(Model &model, Tape &tape, const Batch &batch,
                         const TrainConfig &config, bool with_asr, bool with_adv,
                         bool reverse_into_encoder) {
  std::vector<Var> ctc_terms, attn_terms, spk_terms;
  for (size_t i = 0; i < batch.members.size(); ++i) {
    const Utterance &utt = *batch.members[i];
    auto [phi, sub_mask] = model.encoder.forward(tape, batch.features[i],
                                                 batch.masks[i]);
    int64_t n_valid = prefix_length(sub_mask);
    if (with_asr) {
      Var lp = model.ctc.log_probs(tape, phi);
      ctc_terms.push_back(ctc_loss(lp, model.vocab.ctc_targets(utt.transcript),
                                   n_valid));
      attn_terms.push_back(model.attention.loss(
          tape, phi, sub_mask, model.vocab.attn_targets(utt.transcript)));
    }
    if (with_adv) {
      Var adv_in = reverse_into_encoder ? gradient_reversal(phi, config.alpha) : phi;
      Var lp = model.adversary.forward(tape, adv_in, sub_mask);
      spk_terms.push_back(adversary_loss(
          lp, model.speakers.class_of(utt.speaker_id), sub_mask));
    }
  }
  BatchLosses out;
  if (with_asr) {
    Var l_c = mean_of(std::move(ctc_terms));
    Var l_a = mean_of(std::move(attn_terms));
    out.l_c = scalar_value(l_c);
    out.l_a = scalar_value(l_a);
    out.asr = asr_loss(l_c, l_a, config.lambda);
  }
  if (with_adv) {
    out.spk = mean_of(std::move(spk_terms));
    out.l_spk = scalar_value(out.spk);
  }
  return out;
}

}  // namespace

JointObjective joint_objective(Model &model, Tape &tape, const Batch &batch,
                               const TrainConfig &config) {
  if (config.stage != Stage::kJoint)
    throw DataError("joint_objective: config stage is not 'joint'");
  config.validate();

  BatchLosses losses = batch_losses(model, tape, batch, config, /*with_asr=*/true,
                                    /*with_adv=*/config.adversary_branch,
                                    /*reverse_into_encoder=*/true);
  JointObjective obj;
  obj.l_c = losses.l_c;
  obj.l_a = losses.l_a;
  obj.l_spk = losses.l_spk;
  obj.asr = asr_loss(losses.l_c, losses.l_a, config.lambda);
  obj.min_player = obj.asr - config.alpha * obj.l_spk;
  obj.backward_root = losses.spk ? add(losses.asr, losses.spk) : losses.asr;
  return obj;
}

std::vector<EpochLog> run_stage(Model &model, const TrainConfig &config,
                                const std::vector<const Utterance *> &data) {
  config.validate();
  if (data.empty()) throw DataError("run_stage: empty dataset");

  const bool with_asr =
      config.stage == Stage::kPretrainAsr || config.stage == Stage::kJoint;
  const bool with_adv = config.stage != Stage::kPretrainAsr &&
                        (config.stage != Stage::kJoint || config.adversary_branch);

  if (with_adv) {
    for (const auto *u : data) {
      try {
        model.speakers.class_of(u->speaker_id);
      } catch (const DataError &) {
        throw DataError(str_cat("run_stage: stage/dataset mismatch: speaker '",
                                u->speaker_id, "' (utterance ", u->id,
                                ") is unknown to the adversary"));
      }
    }
  }

  std::vector<Batch> batches = make_batches(data, config.batch_size);
  std::vector<Param *> everything = model.all_params();

  // The adversary group steps with its own optimizer so the max player can
  // run at its own rate.
  std::vector<Param *> adv_params, main_params;
  {
    std::set<const Param *> adv_set;
    for (Param *p : model.group("adversary")) adv_set.insert(p);
    for (Param *p : model.groups_for(config.stage))
      (adv_set.count(p) ? adv_params : main_params).push_back(p);
  }
  AdamOptimizer opt({.lr = config.lr, .clip_norm = config.clip_norm});
  AdamOptimizer adv_opt(
      {.lr = config.effective_adversary_lr(), .clip_norm = config.clip_norm});

  std::mt19937_64 shuffle_rng(
      sub_seed(config.seed, "shuffle/" + stage_name(config.stage)));
  std::vector<size_t> order(batches.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochLog> log;
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum_c = 0.0, sum_a = 0.0, sum_s = 0.0;
    int64_t utt_count = 0;
    for (size_t bi : order) {
      const Batch &batch = batches[bi];
      Tape tape;
      BatchLosses losses =
          batch_losses(model, tape, batch, config, with_asr, with_adv,
                       /*reverse_into_encoder=*/config.stage == Stage::kJoint);
      Var root;
      if (losses.asr && losses.spk) root = add(losses.asr, losses.spk);
      else root = losses.asr ? losses.asr : losses.spk;
      backward(root);
      tape.accumulate_param_grads();
      if (!main_params.empty()) opt.step(main_params);
      if (!adv_params.empty()) adv_opt.step(adv_params);
      for (Param *p : everything) p->zero_grad();

      double n = static_cast<double>(batch.members.size());
      sum_c += losses.l_c * n;
      sum_a += losses.l_a * n;
      sum_s += losses.l_spk * n;
      utt_count += batch.members.size();
    }
    EpochLog e;
    e.epoch = epoch;
    e.stage = config.stage;
    e.has_asr = with_asr;
    e.has_spk = with_adv;
    double n = static_cast<double>(utt_count);
    e.l_c = with_asr ? sum_c / n : 0.0;
    e.l_a = with_asr ? sum_a / n : 0.0;
    e.l_spk = with_adv ? sum_s / n : 0.0;
    if (config.stage == Stage::kJoint)
      e.objective = asr_loss(e.l_c, e.l_a, config.lambda) - config.alpha * e.l_spk;
    else if (with_asr)
      e.objective = asr_loss(e.l_c, e.l_a, config.lambda);
    else
      e.objective = e.l_spk;
    log.push_back(e);
  }
  return log;
}

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string loss_log_csv(const std::vector<EpochLog> &log) {
  std::string out = "epoch,stage,L_c,L_a,L_spk,objective\n";
  for (const auto &e : log) {
    out += std::to_string(e.epoch) + "," + stage_name(e.stage) + ",";
    out += (e.has_asr ? fmt_double(e.l_c) : std::string()) + ",";
    out += (e.has_asr ? fmt_double(e.l_a) : std::string()) + ",";
    out += (e.has_spk ? fmt_double(e.l_spk) : std::string()) + ",";
    out += fmt_double(e.objective) + "\n";
  }
  return out;
}

// -- Checkpoints -----------------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[9] = "ADVASRCK";
}

void save_checkpoint(const std::string &path, const Model &model,
                     const TrainConfig &config, Stage last_completed) {
  Model &m = const_cast<Model &>(model);

  json params = json::array();
  std::string payload;
  for (Param *p : m.all_params()) {
    json entry{{"name", p->name}, {"shape", p->value.shape()}};
    params.push_back(entry);
    payload.append(reinterpret_cast<const char *>(p->value.data()),
                   static_cast<size_t>(p->value.numel()) * sizeof(double));
  }

  json header{{"magic", "advasr-checkpoint"},
              {"version", 1},
              {"stage_completed", stage_name(last_completed)},
              {"vocab", m.vocab.to_string()},
              {"speakers", m.speakers.ids()},
              {"model",
               {{"feature_dim", m.cfg.feature_dim},
                {"encoder_hidden", m.cfg.encoder_hidden},
                {"encoder_layers", m.cfg.encoder_layers},
                {"downsample_factor", m.cfg.downsample_factor},
                {"attn_hidden", m.cfg.attn_hidden},
                {"attn_dim", m.cfg.attn_dim},
                {"attn_channels", m.cfg.attn_channels},
                {"attn_width", m.cfg.attn_width},
                {"attn_embed_dim", m.cfg.attn_embed_dim},
                {"adversary_hidden", m.cfg.adversary_hidden},
                {"adversary_layers", m.cfg.adversary_layers}}},
              {"train",
               {{"lambda", config.lambda},
                {"alpha", config.alpha},
                {"lr", config.lr},
                {"batch_size", config.batch_size},
                {"epochs", config.epochs},
                {"seed", config.seed},
                {"clip_norm", config.clip_norm},
                {"stage", stage_name(config.stage)}}},
              {"params", params}};

  std::string head = header.dump();
  std::string file(kCheckpointMagic, 8);
  uint32_t version = 1;
  uint64_t head_len = head.size();
  file.append(reinterpret_cast<const char *>(&version), sizeof(version));
  file.append(reinterpret_cast<const char *>(&head_len), sizeof(head_len));
  file += head;
  file += payload;
  write_file_atomic(path, file);
}

LoadedCheckpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot read " + path);
  std::string file((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (file.size() < 20 || file.compare(0, 8, kCheckpointMagic, 8) != 0)
    throw DataError("checkpoint: bad magic");
  uint32_t version = 0;
  uint64_t head_len = 0;
  std::copy_n(file.data() + 8, sizeof(version), reinterpret_cast<char *>(&version));
  std::copy_n(file.data() + 12, sizeof(head_len), reinterpret_cast<char *>(&head_len));
  if (version != 1) throw DataError("checkpoint: unsupported version");
  if (20 + head_len > file.size()) throw DataError("checkpoint: truncated header");
  json header = json::parse(file.substr(20, head_len), nullptr, false);
  if (header.is_discarded() || header.value("magic", "") != "advasr-checkpoint")
    throw DataError("checkpoint: malformed header");

  LoadedCheckpoint out;
  const json &mc = header.at("model");
  ModelConfig cfg;
  cfg.feature_dim = mc.at("feature_dim").get<int64_t>();
  cfg.encoder_hidden = mc.at("encoder_hidden").get<int64_t>();
  cfg.encoder_layers = mc.at("encoder_layers").get<int64_t>();
  cfg.downsample_factor = mc.at("downsample_factor").get<int64_t>();
  cfg.attn_hidden = mc.at("attn_hidden").get<int64_t>();
  cfg.attn_dim = mc.at("attn_dim").get<int64_t>();
  cfg.attn_channels = mc.at("attn_channels").get<int64_t>();
  cfg.attn_width = mc.at("attn_width").get<int64_t>();
  cfg.attn_embed_dim = mc.at("attn_embed_dim").get<int64_t>();
  cfg.adversary_hidden = mc.at("adversary_hidden").get<int64_t>();
  cfg.adversary_layers = mc.at("adversary_layers").get<int64_t>();

  const json &tc = header.at("train");
  out.config.lambda = tc.at("lambda").get<double>();
  out.config.alpha = tc.at("alpha").get<double>();
  out.config.lr = tc.at("lr").get<double>();
  out.config.batch_size = tc.at("batch_size").get<int64_t>();
  out.config.epochs = tc.at("epochs").get<int64_t>();
  out.config.seed = tc.at("seed").get<uint64_t>();
  out.config.clip_norm = tc.at("clip_norm").get<double>();
  out.config.stage = stage_from_name(tc.at("stage").get<std::string>());
  out.last_completed = stage_from_name(header.at("stage_completed").get<std::string>());

  Vocab vocab = Vocab::from_string(header.at("vocab").get<std::string>());
  SpeakerTable table(header.at("speakers").get<std::vector<std::string>>());
  out.model = Model(cfg, vocab, table, out.config.seed);

  size_t cursor = 20 + head_len;
  auto params = out.model.all_params();
  const json &dir = header.at("params");
  if (dir.size() != params.size())
    throw DataError("checkpoint: parameter directory size mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (dir[i].at("name").get<std::string>() != params[i]->name)
      throw DataError("checkpoint: parameter order mismatch at " + params[i]->name);
    auto shape = dir[i].at("shape").get<std::vector<int64_t>>();
    if (shape != params[i]->value.shape())
      throw DataError("checkpoint: shape mismatch for " + params[i]->name);
    size_t bytes = static_cast<size_t>(params[i]->value.numel()) * sizeof(double);
    if (cursor + bytes > file.size()) throw DataError("checkpoint: truncated payload");
    std::copy_n(file.data() + cursor, bytes,
                reinterpret_cast<char *>(params[i]->value.data()));
    cursor += bytes;
  }
  if (cursor != file.size()) throw DataError("checkpoint: trailing bytes");
  return out;
}

}  // namespace advasr
