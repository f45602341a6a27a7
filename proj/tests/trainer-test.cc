// tests/trainer-test.cc

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

#include <cmath>
#include <filesystem>
#include <map>

#include "advasr/trainer.h"

using namespace advasr;

namespace {

CorpusConfig tiny_corpus_config(uint64_t seed) {
  CorpusConfig c;
  c.num_speakers = 4;
  c.utts_per_speaker = 6;
  c.vocab = "abc";
  c.feature_dim = 4;
  c.min_symbols = 2;
  c.max_symbols = 3;
  c.min_seg_frames = 4;
  c.max_seg_frames = 6;
  c.noise = 0.1;
  c.speaker_strength = 1.5;
  c.seed = seed;
  return c;
}

ModelConfig tiny_model_config() {
  ModelConfig m;
  m.feature_dim = 4;
  m.encoder_hidden = 4;
  m.encoder_layers = 1;
  m.downsample_factor = 4;
  m.attn_hidden = 4;
  m.attn_dim = 4;
  m.attn_channels = 2;
  m.attn_width = 3;
  m.attn_embed_dim = 3;
  m.adversary_hidden = 4;
  m.adversary_layers = 1;
  return m;
}

struct Fixture {
  Corpus corpus;
  Model model;
  std::vector<const Utterance *> train;

  explicit Fixture(uint64_t seed) {
    corpus = generate_synthetic_corpus(tiny_corpus_config(seed));
    make_splits(corpus, {.open_speakers = 0, .test_per_speaker = 1,
                         .dev_per_speaker = 1});
    model = Model(tiny_model_config(), corpus.vocab(),
                  corpus.closed_speaker_table(), seed);
    train = corpus.split("train-adv");
  }
};

std::map<std::string, Tensor> snapshot(Model &model, const std::string &group) {
  std::map<std::string, Tensor> out;
  for (Param *p : model.group(group)) out[p->name] = p->value;
  return out;
}

bool identical(const std::map<std::string, Tensor> &a,
               const std::map<std::string, Tensor> &b) {
  if (a.size() != b.size()) return false;
  for (const auto &[name, t] : a) {
    auto it = b.find(name);
    if (it == b.end() || t.values() != it->second.values()) return false;
  }
  return true;
}

std::map<std::string, Tensor> group_grads(Model &model, const std::string &group) {
  std::map<std::string, Tensor> out;
  for (Param *p : model.group(group)) out[p->name] = p->grad;
  return out;
}

}  // namespace

TEST_CASE("asr loss combines the branch losses") {
  CHECK(asr_loss(2.0, 4.0, 0.0) == 4.0);
  CHECK(asr_loss(2.0, 4.0, 1.0) == 2.0);
  CHECK(asr_loss(2.0, 4.0, 0.5) == 3.0);
  CHECK_THROWS_AS(asr_loss(1.0, 1.0, 1.5), DataError);
}

TEST_CASE("joint objective realizes the min-max gradients through reversal") {
  Fixture fx(101);
  auto batches = make_batches(fx.train, 4);
  TrainConfig cfg;
  cfg.stage = Stage::kJoint;
  cfg.lambda = 0.5;
  cfg.seed = 3;

  for (double alpha : {0.0, 0.5, 2.0}) {
    cfg.alpha = alpha;

    // Joint pass.
    Tape joint_tape;
    JointObjective obj = joint_objective(fx.model, joint_tape, batches[0], cfg);
    backward(obj.backward_root);
    joint_tape.accumulate_param_grads();
    auto g_joint = group_grads(fx.model, "encoder");
    auto g_joint_adv = group_grads(fx.model, "adversary");
    for (Param *p : fx.model.all_params()) p->zero_grad();

    // ASR-only pass.
    {
      TrainConfig asr_cfg = cfg;
      asr_cfg.stage = Stage::kJoint;
      asr_cfg.adversary_branch = false;
      Tape tape;
      JointObjective asr_only = joint_objective(fx.model, tape, batches[0], asr_cfg);
      backward(asr_only.backward_root);
      tape.accumulate_param_grads();
    }
    auto g_asr = group_grads(fx.model, "encoder");
    for (Param *p : fx.model.all_params()) p->zero_grad();

    // Adversary-only pass without any reversal.
    {
      Tape tape;
      std::vector<Var> terms;
      for (size_t i = 0; i < batches[0].members.size(); ++i) {
        auto [phi, sub_mask] = fx.model.encoder.forward(tape, batches[0].features[i],
                                                        batches[0].masks[i]);
        Var lp = fx.model.adversary.forward(tape, phi, sub_mask);
        terms.push_back(adversary_loss(
            lp, fx.model.speakers.class_of(batches[0].members[i]->speaker_id),
            sub_mask));
      }
      Var mean_spk = scale(sum(stack_scalars(terms)),
                           1.0 / static_cast<double>(terms.size()));
      backward(mean_spk);
      tape.accumulate_param_grads();
    }
    auto g_spk = group_grads(fx.model, "encoder");
    auto g_spk_adv = group_grads(fx.model, "adversary");
    for (Param *p : fx.model.all_params()) p->zero_grad();

    // Encoder: g_joint == g_asr - alpha * g_spk, elementwise.
    for (const auto &[name, gj] : g_joint) {
      const Tensor &ga = g_asr.at(name);
      const Tensor &gs = g_spk.at(name);
      for (int64_t i = 0; i < gj.numel(); ++i) {
        double want = ga[i] - alpha * gs[i];
        CHECK(std::fabs(gj[i] - want) <= 1e-9 * std::max(1.0, std::fabs(want)));
      }
    }
    // Adversary: the reversal leaves its own gradient untouched.
    for (const auto &[name, gj] : g_joint_adv) {
      const Tensor &gs = g_spk_adv.at(name);
      for (int64_t i = 0; i < gj.numel(); ++i)
        CHECK(gj[i] == doctest::Approx(gs[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("adversary pretraining freezes the ASR parameter groups byte-for-byte") {
  Fixture fx(102);
  auto before_enc = snapshot(fx.model, "encoder");
  auto before_ctc = snapshot(fx.model, "ctc");
  auto before_attn = snapshot(fx.model, "attention");
  auto before_adv = snapshot(fx.model, "adversary");

  TrainConfig cfg;
  cfg.stage = Stage::kPretrainAdv;
  cfg.epochs = 2;
  cfg.seed = 7;
  run_stage(fx.model, cfg, fx.train);

  CHECK(identical(before_enc, snapshot(fx.model, "encoder")));
  CHECK(identical(before_ctc, snapshot(fx.model, "ctc")));
  CHECK(identical(before_attn, snapshot(fx.model, "attention")));
  CHECK(!identical(before_adv, snapshot(fx.model, "adversary")));
}

TEST_CASE("adversary refit freezes the encoder byte-for-byte") {
  Fixture fx(103);
  auto before_enc = snapshot(fx.model, "encoder");
  TrainConfig cfg;
  cfg.stage = Stage::kAdvRefit;
  cfg.epochs = 1;
  cfg.seed = 9;
  run_stage(fx.model, cfg, fx.train);
  CHECK(identical(before_enc, snapshot(fx.model, "encoder")));
}

TEST_CASE("ASR pretraining never touches the adversary") {
  Fixture fx(109);
  auto before_adv = snapshot(fx.model, "adversary");
  auto before_enc = snapshot(fx.model, "encoder");
  TrainConfig cfg;
  cfg.stage = Stage::kPretrainAsr;
  cfg.epochs = 2;
  cfg.seed = 15;
  run_stage(fx.model, cfg, fx.train);
  CHECK(identical(before_adv, snapshot(fx.model, "adversary")));
  CHECK(!identical(before_enc, snapshot(fx.model, "encoder")));
}

TEST_CASE("same seed reproduces the loss log and the parameters") {
  auto run = []() {
    Fixture fx(104);
    TrainConfig cfg;
    cfg.stage = Stage::kPretrainAsr;
    cfg.epochs = 3;
    cfg.seed = 11;
    cfg.lr = 2e-3;
    auto log = run_stage(fx.model, cfg, fx.train);
    return std::pair{loss_log_csv(log), snapshot(fx.model, "encoder")};
  };
  auto [csv_a, enc_a] = run();
  auto [csv_b, enc_b] = run();
  CHECK(csv_a == csv_b);
  CHECK(identical(enc_a, enc_b));
}

TEST_CASE("alpha zero matches a build without the adversarial branch") {
  auto run = [](bool branch) {
    Fixture fx(105);
    // Pretrain briefly, then joint with alpha = 0.
    TrainConfig pre;
    pre.stage = Stage::kPretrainAsr;
    pre.epochs = 1;
    pre.seed = 13;
    run_stage(fx.model, pre, fx.train);

    TrainConfig joint;
    joint.stage = Stage::kJoint;
    joint.alpha = 0.0;
    joint.epochs = 2;
    joint.seed = 13;
    joint.adversary_branch = branch;
    run_stage(fx.model, joint, fx.train);
    return snapshot(fx.model, "encoder");
  };
  CHECK(identical(run(true), run(false)));
}

TEST_CASE("single-batch pretraining loss is non-increasing early on") {
  Fixture fx(106);
  std::vector<const Utterance *> one_batch(fx.train.begin(),
                                           fx.train.begin() + 4);
  TrainConfig cfg;
  cfg.stage = Stage::kPretrainAsr;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.lr = 5e-3;
  cfg.seed = 17;
  auto log = run_stage(fx.model, cfg, one_batch);
  REQUIRE(log.size() == 5);
  int violations = 0;
  for (size_t i = 1; i < log.size(); ++i)
    violations += log[i].objective > log[i - 1].objective;
  CHECK(violations <= 1);
}

TEST_CASE("stage and dataset must agree on the speaker inventory") {
  Fixture fx(107);
  Utterance stranger;
  stranger.id = "ghost";
  stranger.speaker_id = "spk999";
  stranger.group = "A";
  stranger.transcript = "ab";
  stranger.features = Tensor::full({8, 4}, 0.1);
  std::vector<const Utterance *> data = fx.train;
  data.push_back(&stranger);

  TrainConfig cfg;
  cfg.stage = Stage::kPretrainAdv;
  cfg.epochs = 1;
  CHECK_THROWS_WITH_AS(run_stage(fx.model, cfg, data),
                       doctest::Contains("stage/dataset mismatch"), DataError);
}

TEST_CASE("loss csv lists every configured column") {
  EpochLog e;
  e.epoch = 0;
  e.stage = Stage::kJoint;
  e.l_c = 1.5;
  e.l_a = 2.5;
  e.l_spk = 3.5;
  e.objective = 2.0 - 0.5 * 3.5;
  e.has_asr = e.has_spk = true;
  std::string csv = loss_log_csv({e});
  CHECK(csv.find("epoch,stage,L_c,L_a,L_spk,objective") == 0);
  CHECK(csv.find("0,joint,1.5,2.5,3.5,") != std::string::npos);

  EpochLog adv;
  adv.epoch = 2;
  adv.stage = Stage::kAdvRefit;
  adv.l_spk = 1.25;
  adv.objective = 1.25;
  adv.has_spk = true;
  std::string csv2 = loss_log_csv({adv});
  CHECK(csv2.find("2,adv-refit,,,1.25,1.25") != std::string::npos);
}

TEST_CASE("checkpoints round-trip every parameter bit-exactly") {
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "advasr-ckpt-test.bin").string();

  Fixture fx(108);
  TrainConfig cfg;
  cfg.stage = Stage::kPretrainAsr;
  cfg.epochs = 1;
  cfg.alpha = 0.5;
  cfg.seed = 23;
  run_stage(fx.model, cfg, fx.train);
  save_checkpoint(path, fx.model, cfg, Stage::kPretrainAsr);

  LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.last_completed == Stage::kPretrainAsr);
  CHECK(loaded.config.alpha == 0.5);
  CHECK(loaded.config.seed == 23);
  CHECK(loaded.model.vocab.to_string() == fx.model.vocab.to_string());

  auto want = fx.model.all_params();
  auto got = loaded.model.all_params();
  REQUIRE(want.size() == got.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(want[i]->name == got[i]->name);
    CHECK(want[i]->value.values() == got[i]->value.values());
  }

  // Corruption is detected.
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  bytes[3] = 'X';
  write_file_atomic(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  fs::remove(path);
}

TEST_CASE("adam first step follows the closed form and clipping scales") {
  Param p("w", Tensor::scalar(1.0));
  AdamOptimizer opt({.lr = 0.1, .clip_norm = 100.0});
  p.grad[0] = 0.5;
  opt.step({&p});
  CHECK(p.value[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(p.grad[0] == 0.0);

  Param q("q", Tensor::scalar(2.0));
  AdamOptimizer opt2({.lr = 0.1});
  opt2.step({&q});
  CHECK(q.value[0] == 2.0);

  Param a("a", Tensor::scalar(0.0)), b("b", Tensor::scalar(0.0));
  a.grad[0] = 30.0;
  b.grad[0] = 40.0;  // norm 50 against clip 5: scaled by 0.1
  AdamOptimizer opt3({.lr = 1.0, .clip_norm = 5.0});
  opt3.step({&a, &b});
  CHECK(a.value[0] == doctest::Approx(-3.0 / (3.0 + 1e-8)).epsilon(1e-9));
  CHECK(b.value[0] == doctest::Approx(-4.0 / (4.0 + 1e-8)).epsilon(1e-9));

  Param bad("theta.bad", Tensor::scalar(0.0));
  bad.grad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(opt3.step({&bad}), doctest::Contains("theta.bad"),
                       NumericError);
}
