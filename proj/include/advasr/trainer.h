// include/advasr/trainer.h

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

#ifndef ADVASR_TRAINER_H_
#define ADVASR_TRAINER_H_

#include <string>
#include <vector>

#include "advasr/adversary.h"
#include "advasr/attention.h"
#include "advasr/ctc.h"
#include "advasr/data.h"
#include "advasr/encoder.h"
#include "advasr/optimizer.h"

namespace advasr {

enum class Stage { kPretrainAsr, kPretrainAdv, kJoint, kAdvRefit };

std::string stage_name(Stage s);
Stage stage_from_name(const std::string &name);
/// Position in the fixed four-stage schedule, 0-based.
int stage_order(Stage s);

struct TrainConfig {
  double lambda = 0.5;   // CTC weight inside the ASR loss
  double alpha = 0.0;    // adversarial trade-off
  double lr = 3e-3;
  // Learning rate for theta_s; 0 means "same as lr".  The max player has to
  // track the encoder closely during the joint stage or its gradients point
  // at a stale decision boundary.
  double adversary_lr = 0.0;
  int64_t batch_size = 8;
  int64_t epochs = 10;
  uint64_t seed = 1;
  Stage stage = Stage::kPretrainAsr;
  double clip_norm = 5.0;
  // When false the joint stage skips the adversarial branch entirely; used
  // to verify that alpha = 0 reproduces a build without the branch.
  bool adversary_branch = true;

  void validate() const;
  double effective_adversary_lr() const { return adversary_lr > 0 ? adversary_lr : lr; }
};

struct ModelConfig {
  int64_t feature_dim = 16;
  int64_t encoder_hidden = 32;
  int64_t encoder_layers = 2;
  int64_t downsample_factor = 4;
  int64_t attn_hidden = 16;
  int64_t attn_dim = 16;
  int64_t attn_channels = 4;
  int64_t attn_width = 3;
  int64_t attn_embed_dim = 8;
  int64_t adversary_hidden = 32;
  int64_t adversary_layers = 1;
};

/// The four parameter groups: encoder (theta_e), CTC head (theta_c),
/// attention decoder (theta_a) and speaker-adversarial branch (theta_s).
struct Model {
  ModelConfig cfg;
  Vocab vocab;
  SpeakerTable speakers;
  Encoder encoder;
  CtcHead ctc;
  AttentionDecoder attention;
  Adversary adversary;

  Model() = default;
  Model(const ModelConfig &config, const Vocab &v, const SpeakerTable &table,
        uint64_t seed);

  std::vector<Param *> group(const std::string &name);
  std::vector<Param *> groups_for(Stage stage);
  std::vector<Param *> all_params();
};

/// lambda * L_c + (1 - lambda) * L_a.
double asr_loss(double l_c, double l_a, double lambda);
Var asr_loss(const Var &l_c, const Var &l_a, double lambda);

/// One batch of the joint min-max objective, realized with gradient
/// reversal: a single backward pass hands theta_s the plain adversarial
/// gradient while theta_e receives d L_asr - alpha * d L_spk.
struct JointObjective {
  Var backward_root;
  double l_c = 0.0;
  double l_a = 0.0;
  double l_spk = 0.0;
  double asr = 0.0;        // lambda L_c + (1 - lambda) L_a
  double min_player = 0.0; // asr - alpha * L_spk
};
JointObjective joint_objective(Model &model, Tape &tape, const Batch &batch,
                               const TrainConfig &config);

struct EpochLog {
  int64_t epoch = 0;
  Stage stage = Stage::kPretrainAsr;
  double l_c = 0.0, l_a = 0.0, l_spk = 0.0, objective = 0.0;
  bool has_asr = false, has_spk = false;
};

/// Runs one stage over the dataset, updating only the stage's parameter
/// groups.  Deterministic under config.seed.
std::vector<EpochLog> run_stage(Model &model, const TrainConfig &config,
                                const std::vector<const Utterance *> &data);

/// Loss log CSV with columns epoch,stage,L_c,L_a,L_spk,objective
/// (cells a stage does not compute stay empty).
std::string loss_log_csv(const std::vector<EpochLog> &log);

// Checkpoints: a versioned binary file holding the run metadata and every
// named parameter tensor.
void save_checkpoint(const std::string &path, const Model &model,
                     const TrainConfig &config, Stage last_completed);

struct LoadedCheckpoint {
  Model model;
  TrainConfig config;
  Stage last_completed = Stage::kPretrainAsr;
};
LoadedCheckpoint load_checkpoint(const std::string &path);

}  // namespace advasr

#endif  // ADVASR_TRAINER_H_
