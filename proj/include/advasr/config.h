// include/advasr/config.h

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

#ifndef ADVASR_CONFIG_H_
#define ADVASR_CONFIG_H_

#include <string>

#include "advasr/data.h"
#include "advasr/trainer.h"

namespace advasr {

/// Every run-time knob, grouped the way the INI sections are.  One master
/// seed under [run] fans out to named sub-seeds for each component.
struct RunConfig {
  // [run]
  uint64_t seed = 1234;

  // [corpus]
  CorpusConfig corpus;
  int64_t open_speakers = 4;

  // [model]
  ModelConfig model;

  // [train]
  double lambda = 0.5;
  double alpha = 0.0;
  double lr = 3e-3;
  double adversary_lr = 0.0;  // 0 = follow lr
  int64_t batch_size = 8;
  double clip_norm = 5.0;
  int64_t epochs_pretrain_asr = 10;
  int64_t epochs_pretrain_adv = 15;
  int64_t epochs_joint = 15;
  int64_t epochs_adv_refit = 5;

  // [eval]
  std::string eval_backend = "cosine";  // cosine | plda | both
  int64_t enroll_frames = 200;
  int64_t embed_hidden = 24;
  int64_t embed_dim = 8;
  int64_t embed_epochs = 30;
  double embed_lr = 1e-2;
  int64_t embed_batch = 8;
  int64_t attacker_epochs = 20;
  double attacker_lr = 3e-3;
  int64_t plda_iterations = 15;
  int64_t beam_size = 4;
  int64_t max_decode_len = 24;

  /// Per-stage TrainConfig with the shared knobs filled in.
  TrainConfig train_config(Stage stage) const;
};

/// Parses "key = value" lines under "[section]" headers; '#' and ';' start
/// comments.  Unknown sections or keys are rejected by name.
RunConfig parse_config_text(const std::string &text);
RunConfig parse_config_file(const std::string &path);

/// Applies one "section.key=value" override (the CLI flag path).
void apply_override(RunConfig &config, const std::string &assignment);

/// Renders the effective configuration, suitable for echoing into output
/// directories and for re-parsing.
std::string render_config(const RunConfig &config);

}  // namespace advasr

#endif  // ADVASR_CONFIG_H_
