// tests/acceptance/acceptance.cc

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

// End-to-end acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance                  runs every criterion
//   acceptance --criterion N    runs criterion N (repeatable)
//
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "advasr/asr-eval.h"
#include "advasr/cli.h"
#include "advasr/config.h"
#include "advasr/speaker-eval.h"
#include "advasr/trainer.h"

#include "../test-util.h"

namespace advasr {
namespace {

namespace fs = std::filesystem;

struct CheckFailure : std::runtime_error {
  explicit CheckFailure(const std::string &msg) : std::runtime_error(msg) {}
};

void require(bool ok, const std::string &what) {
  if (!ok) throw CheckFailure(what);
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Tensor random_log_probs(int64_t t, int64_t classes, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Tensor lp({t, classes});
  for (int64_t i = 0; i < t; ++i) {
    double mx = -1e300;
    for (int64_t j = 0; j < classes; ++j) {
      lp.at(i, j) = dist(rng);
      mx = std::max(mx, lp.at(i, j));
    }
    double z = 0.0;
    for (int64_t j = 0; j < classes; ++j) z += std::exp(lp.at(i, j) - mx);
    double lse = mx + std::log(z);
    for (int64_t j = 0; j < classes; ++j) lp.at(i, j) -= lse;
  }
  return lp;
}

// ---- criterion 1: CTC dynamic program vs path enumeration ----------------------

void criterion_ctc_oracle() {
  std::mt19937_64 rng(20260808);
  std::uniform_int_distribution<int> t_dist(1, 4), v_dist(2, 3), m_dist(0, 2);
  int done = 0;
  while (done < 200) {
    int64_t t = t_dist(rng), classes = v_dist(rng);
    int m = m_dist(rng);
    std::vector<int> targets;
    std::uniform_int_distribution<int> c_dist(1, static_cast<int>(classes) - 1);
    for (int i = 0; i < m; ++i) targets.push_back(c_dist(rng));
    if (ctc_min_frames(targets) > t) continue;
    Tensor lp = random_log_probs(t, classes, rng);
    double dp = scalar_value(ctc_loss(make_leaf(lp), targets));
    double bf = ctc_brute_force(lp, targets);
    require(std::fabs(dp - bf) < 1e-10,
            str_cat("instance ", done, ": |dp - brute| = ", std::fabs(dp - bf)));
    ++done;
  }
}

// ---- criterion 2: finite-difference gradient suite ------------------------------

void criterion_gradient_suite() {
  const double tol = 1e-4;
  std::mt19937_64 rng(7);

  // Linear layer.
  {
    Linear lin("lin", 3, 4, rng);
    Tensor x = testutil::random_tensor({5, 3}, rng);
    std::mt19937_64 wrng(1);
    Tensor w = testutil::random_tensor({5, 4}, wrng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) { return sum(mul(lin.apply(tape, make_const(x)), make_const(w))); },
        [&](const ParamVisitor &fn) { lin.visit(fn); });
    require(err < tol, str_cat("linear layer gradient error ", err));
  }
  // Unidirectional and bidirectional recurrent layers.
  {
    GruLayer uni("uni", 3, 3, rng);
    BiGruLayer bi("bi", 3, 2, rng);
    Tensor x = testutil::random_tensor({4, 3}, rng);
    std::mt19937_64 wrng(2);
    Tensor wu = testutil::random_tensor({4, 3}, wrng);
    Tensor wb = testutil::random_tensor({4, 4}, wrng);
    double err_u = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return sum(mul(uni.apply(tape, make_const(x), all_valid(4)), make_const(wu)));
        },
        [&](const ParamVisitor &fn) { uni.visit(fn); });
    require(err_u < tol, str_cat("recurrent layer gradient error ", err_u));
    double err_b = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return sum(mul(bi.apply(tape, make_const(x), all_valid(4)), make_const(wb)));
        },
        [&](const ParamVisitor &fn) { bi.visit(fn); });
    require(err_b < tol, str_cat("bidirectional layer gradient error ", err_b));
  }
  // Stats pooling through a nonlinearity.
  {
    Linear lin("pool.lin", 3, 3, rng);
    Tensor x = testutil::random_tensor({5, 3}, rng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return sum(stats_pool(advasr::tanh(lin.apply(tape, make_const(x))),
                                all_valid(5)));
        },
        [&](const ParamVisitor &fn) { lin.visit(fn); });
    require(err < tol, str_cat("stats pooling gradient error ", err));
  }
  // Encoder stack (subsampling + recurrent layers).
  {
    Encoder enc({.input_dim = 2, .hidden_dim = 2, .num_layers = 2,
                 .downsample_factor = 2}, rng);
    Tensor x = testutil::random_tensor({6, 2}, rng);
    std::mt19937_64 wrng(3);
    Tensor w = testutil::random_tensor({3, 4}, wrng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) {
          auto [phi, mask] = enc.forward(tape, x, all_valid(6));
          (void)mask;
          return sum(mul(phi, make_const(w)));
        },
        [&](const ParamVisitor &fn) { enc.visit(fn); });
    require(err < tol, str_cat("encoder gradient error ", err));
  }

  Vocab vocab = Vocab::from_string("ab");

  // CTC loss, both through the head parameters and through the inputs.
  {
    CtcHead head("ctc", 3, vocab, rng);
    Tensor phi = testutil::random_tensor({4, 3}, rng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return ctc_loss(head.log_probs(tape, make_const(phi)), {1, 2});
        },
        [&](const ParamVisitor &fn) { head.visit(fn); });
    require(err < tol, str_cat("ctc head gradient error ", err));

    Tensor logits = testutil::random_tensor({4, 3}, rng);
    double err_in = grad_check(
        [](const Var &v) { return ctc_loss(log_softmax_rows(v), {1, 2}); }, logits);
    require(err_in < tol, str_cat("ctc input gradient error ", err_in));
  }
  // Attention loss.
  {
    AttentionConfig ac;
    ac.phi_dim = 3;
    ac.hidden_dim = 3;
    ac.attn_dim = 3;
    ac.conv_channels = 2;
    ac.conv_width = 3;
    ac.embed_dim = 2;
    AttentionDecoder dec("attn", ac, vocab, rng);
    Tensor phi = testutil::random_tensor({4, 3}, rng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return dec.loss(tape, make_const(phi), all_valid(4), {0, 1, 0});
        },
        [&](const ParamVisitor &fn) { dec.visit(fn); });
    require(err < tol, str_cat("attention loss gradient error ", err));
  }
  // Adversarial loss.
  {
    Adversary adv("adv", {.input_dim = 3, .hidden_dim = 2, .num_layers = 1,
                          .num_speakers = 3}, rng);
    Tensor phi = testutil::random_tensor({4, 3}, rng);
    double err = testutil::all_params_grad_check(
        [&](Tape &tape) {
          return adversary_loss(adv.forward(tape, make_const(phi), all_valid(4)), 1,
                                all_valid(4));
        },
        [&](const ParamVisitor &fn) { adv.visit(fn); });
    require(err < tol, str_cat("adversarial loss gradient error ", err));
  }
}

// ---- shared fixtures for training criteria ---------------------------------------

CorpusConfig overfit_corpus_config() {
  CorpusConfig c;
  c.num_speakers = 4;
  c.utts_per_speaker = 5;
  c.vocab = "abcde";
  c.feature_dim = 16;
  c.min_symbols = 2;
  c.max_symbols = 4;
  c.min_seg_frames = 8;
  c.max_seg_frames = 12;
  c.noise = 0.1;
  c.speaker_strength = 1.0;
  c.seed = 424242;
  return c;
}

ModelConfig desk_model_config() {
  ModelConfig m;
  m.feature_dim = 16;
  m.encoder_hidden = 32;
  m.encoder_layers = 2;
  m.downsample_factor = 4;
  m.attn_hidden = 16;
  m.attn_dim = 16;
  m.attn_channels = 4;
  m.attn_width = 3;
  m.attn_embed_dim = 8;
  m.adversary_hidden = 32;
  m.adversary_layers = 1;
  return m;
}

double ctc_greedy_cer(Model &model, const std::vector<const Utterance *> &utts) {
  std::vector<std::string> refs, hyps;
  for (const auto *u : utts) {
    refs.push_back(u->transcript);
    Tape tape;
    auto [phi, mask] = model.encoder.forward(tape, u->features,
                                             all_valid(u->features.rows()));
    (void)mask;
    Var lp = model.ctc.log_probs(tape, phi);
    hyps.push_back(model.vocab.string_of_ctc_ids(ctc_greedy_decode(lp->value)));
  }
  return cer(refs, hyps);
}

// ---- criterion 4: baseline overfit ------------------------------------------------

void criterion_overfit() {
  Corpus corpus = generate_synthetic_corpus(overfit_corpus_config());
  // All 20 utterances form the training set for the overfit check.
  for (auto &u : corpus.utterances) u.split = "train-adv";
  auto train = corpus.split("train-adv");

  Model model(desk_model_config(), corpus.vocab(), corpus.closed_speaker_table(),
              20260401);

  TrainConfig tc;
  tc.stage = Stage::kPretrainAsr;
  tc.lambda = 0.5;
  tc.lr = 3e-3;
  tc.batch_size = 4;
  tc.seed = 20260401;

  double reached = 1e9;
  int64_t used = 0;
  for (int chunk = 0; chunk < 10 && used < 200; ++chunk) {
    tc.epochs = 20;
    tc.seed = 20260401 + static_cast<uint64_t>(chunk);
    run_stage(model, tc, train);
    used += tc.epochs;
    reached = ctc_greedy_cer(model, train);
    if (reached <= 2.0) break;
  }
  require(reached <= 2.0,
          str_cat("training-set CER ", reached, "% after ", used, " epochs"));
}

// ---- criteria 5 and 6: directional reproduction ------------------------------------

CorpusConfig collapse_corpus_config(uint64_t seed) {
  CorpusConfig c;
  c.num_speakers = 14;  // 8 closed-set + 6 open-set speakers
  c.utts_per_speaker = 16;
  c.vocab = "abcde";
  c.feature_dim = 16;
  c.min_symbols = 2;
  c.max_symbols = 4;
  c.min_seg_frames = 8;
  c.max_seg_frames = 12;
  c.noise = 0.1;
  c.speaker_strength = 1.5;
  c.seed = seed;
  return c;
}

struct CollapseOutcome {
  double raw_acc = 0.0;
  std::map<double, double> acc_by_alpha;
  std::map<double, double> eer_by_alpha;
};

RunConfig collapse_eval_config(uint64_t seed) {
  RunConfig rc;
  rc.seed = seed;
  rc.model = desk_model_config();
  rc.attacker_epochs = 25;
  rc.attacker_lr = 3e-3;
  rc.embed_epochs = 30;
  rc.embed_lr = 1e-2;
  rc.embed_hidden = 24;
  rc.embed_dim = 8;
  rc.enroll_frames = 60;
  return rc;
}

double phi_attacker_accuracy(Model &model, const Corpus &corpus) {
  std::vector<int64_t> decisions, labels;
  for (const auto *u : corpus.split("test-adv")) {
    Tensor phi = model.encoder.encode(u->features, all_valid(u->features.rows()),
                                      u->id).frames;
    Tape tape;
    Var lp = model.adversary.forward(tape, make_const(phi), all_valid(phi.rows()));
    decisions.push_back(
        utterance_speaker_decision(lp->value, all_valid(phi.rows())).first);
    labels.push_back(model.speakers.class_of(u->speaker_id));
  }
  return closed_set_accuracy(decisions, labels);
}

double phi_cosine_eer(Model &model, const Corpus &corpus, const RunConfig &rc,
                      uint64_t seed) {
  std::map<std::string, Tensor> phi;
  for (const auto &u : corpus.utterances)
    phi[u.id] = model.encoder.encode(u.features, all_valid(u.features.rows()),
                                     u.id).frames;

  auto train = corpus.split("train-adv");
  EmbeddingNetConfig ec;
  ec.input_dim = model.encoder.output_dim();
  ec.frame_hidden = rc.embed_hidden;
  ec.embed_dim = rc.embed_dim;
  ec.lr = rc.embed_lr;
  ec.epochs = rc.embed_epochs;
  ec.batch_size = rc.embed_batch;
  ec.seed = sub_seed(seed, "embed");
  std::vector<SeqExample> examples;
  for (const auto *u : train) {
    const Tensor &x = phi.at(u->id);
    examples.push_back({&x, all_valid(x.rows()), u->speaker_id, u->id});
  }
  EmbeddingNet net = train_embedding_net(examples, ec);

  TrialSet trials = build_trials(corpus, "open", rc.enroll_frames, sub_seed(seed, "trials"));
  auto embed_of = [&](const std::string &id) {
    const Utterance &u = corpus.by_id(id);
    const Tensor &x = phi.at(id);
    return net.extract(x, all_valid(x.rows()), id, u.speaker_id);
  };
  std::map<std::string, Embedding> models;
  for (const auto &[speaker, utts] : trials.enrollment) {
    std::vector<Embedding> embs;
    for (const auto &id : utts) embs.push_back(embed_of(id));
    models[speaker] = enroll(embs);
  }
  std::vector<double> genuine, impostor;
  for (const auto &trial : trials.trials) {
    double score = cosine_score(models.at(trial.enroll_speaker),
                                embed_of(trial.test_utterance));
    (trial.genuine ? genuine : impostor).push_back(score);
  }
  return 100.0 * eer(genuine, impostor).eer;
}

double raw_feature_accuracy(const Corpus &corpus, const RunConfig &rc, uint64_t seed) {
  SpeakerTable speakers = corpus.closed_speaker_table();
  std::mt19937_64 init_rng(sub_seed(seed, "raw-attacker"));
  Adversary attacker("attacker",
                     {.input_dim = corpus.config.feature_dim,
                      .hidden_dim = rc.model.adversary_hidden,
                      .num_layers = rc.model.adversary_layers,
                      .num_speakers = speakers.size()},
                     init_rng);
  std::vector<Param *> params;
  attacker.visit([&params](Param &p) { params.push_back(&p); });
  AdamOptimizer opt({.lr = rc.attacker_lr, .clip_norm = 5.0});

  auto train = corpus.split("train-adv");
  std::mt19937_64 shuffle_rng(sub_seed(seed, "raw-attacker-shuffle"));
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int64_t epoch = 0; epoch < rc.attacker_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t start = 0; start < order.size(); start += 8) {
      size_t end = std::min(order.size(), start + 8);
      Tape tape;
      std::vector<Var> terms;
      for (size_t i = start; i < end; ++i) {
        const Utterance &u = *train[order[i]];
        Var lp = attacker.forward(tape, make_const(u.features),
                                  all_valid(u.features.rows()));
        terms.push_back(adversary_loss(lp, speakers.class_of(u.speaker_id),
                                       all_valid(u.features.rows())));
      }
      Var loss = scale(sum(stack_scalars(terms)),
                       1.0 / static_cast<double>(terms.size()));
      backward(loss);
      tape.accumulate_param_grads();
      opt.step(params);
    }
  }

  std::vector<int64_t> decisions, labels;
  for (const auto *u : corpus.split("test-adv")) {
    Tape tape;
    Var lp = attacker.forward(tape, make_const(u->features),
                              all_valid(u->features.rows()));
    decisions.push_back(
        utterance_speaker_decision(lp->value, all_valid(u->features.rows())).first);
    labels.push_back(speakers.class_of(u->speaker_id));
  }
  return closed_set_accuracy(decisions, labels);
}

Model four_stage_schedule(const Corpus &corpus, const RunConfig &rc, double alpha,
                          uint64_t seed) {
  Model model(rc.model, corpus.vocab(), corpus.closed_speaker_table(),
              sub_seed(seed, "model"));
  auto train = corpus.split("train-adv");

  auto stage = [&](Stage s, int64_t epochs) {
    TrainConfig tc;
    tc.stage = s;
    tc.lambda = 0.5;
    tc.alpha = alpha;
    tc.lr = 3e-3;
    tc.adversary_lr = 1e-1;  // the max player must track the encoder closely
    tc.batch_size = 8;
    tc.epochs = epochs;
    tc.seed = sub_seed(seed, "train");
    run_stage(model, tc, train);
  };
  // Same shape as the published schedule, scaled to the corpus: ASR
  // pretraining, adversary pretraining, joint min-max, adversary refit.
  stage(Stage::kPretrainAsr, 10);
  stage(Stage::kPretrainAdv, 15);
  stage(Stage::kJoint, 80);
  stage(Stage::kAdvRefit, 15);
  return model;
}

CollapseOutcome collapse_outcome(uint64_t seed) {
  Corpus corpus = generate_synthetic_corpus(collapse_corpus_config(sub_seed(seed, "corpus")));
  make_splits(corpus, {.open_speakers = 6});
  RunConfig rc = collapse_eval_config(seed);

  CollapseOutcome out;
  out.raw_acc = raw_feature_accuracy(corpus, rc, seed);
  for (double alpha : {0.0, 2.0}) {
    Model model = four_stage_schedule(corpus, rc, alpha, seed);
    out.acc_by_alpha[alpha] = phi_attacker_accuracy(model, corpus);
    out.eer_by_alpha[alpha] = phi_cosine_eer(model, corpus, rc, seed);
  }
  return out;
}

std::optional<std::vector<CollapseOutcome>> g_collapse_cache;

const std::vector<CollapseOutcome> &collapse_outcomes() {
  if (!g_collapse_cache) {
    std::vector<CollapseOutcome> runs;
    for (uint64_t seed : {11ULL, 22ULL, 33ULL}) {
      runs.push_back(collapse_outcome(seed));
      const CollapseOutcome &r = runs.back();
      std::fprintf(stderr,
                   "  [seed %llu] raw ACC %.1f | ACC a0 %.1f a2 %.1f | EER a0 %.1f a2 %.1f\n",
                   static_cast<unsigned long long>(seed), r.raw_acc,
                   r.acc_by_alpha.at(0.0), r.acc_by_alpha.at(2.0),
                   r.eer_by_alpha.at(0.0), r.eer_by_alpha.at(2.0));
    }
    g_collapse_cache = std::move(runs);
  }
  return *g_collapse_cache;
}

void criterion_acc_collapse() {
  const auto &runs = collapse_outcomes();
  std::vector<double> drops;
  for (const auto &r : runs) {
    require(r.raw_acc > 90.0,
            str_cat("raw-feature attacker ACC ", r.raw_acc, "% is not above 90%"));
    drops.push_back(r.acc_by_alpha.at(0.0) - r.acc_by_alpha.at(2.0));
  }
  double med = median3(drops);
  require(med >= 30.0,
          str_cat("median ACC drop ", med, " points is below 30"));
}

void criterion_eer_bounded() {
  const auto &runs = collapse_outcomes();
  std::vector<double> changes;
  for (const auto &r : runs)
    changes.push_back(r.eer_by_alpha.at(0.0) - r.eer_by_alpha.at(2.0));
  double med = median3(changes);
  // A positive change means verification got easier (EER decreased) under
  // adversarial training; more than 5 points would contradict the record.
  require(med <= 5.0,
          str_cat("median EER improvement ", med, " points exceeds 5"));
}

// ---- criterion 7: EER oracle --------------------------------------------------------

// Independent oracle: the best achievable max(FAR, FRR) over single swept
// operating points and convex combinations of any two of them, tracked as
// exact fractions so ties collapse to one canonical value.
double eer_pair_oracle(const std::vector<double> &genuine,
                       const std::vector<double> &impostor) {
  std::vector<double> gen = genuine, imp = impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  const int64_t ng = static_cast<int64_t>(gen.size());
  const int64_t ni = static_cast<int64_t>(imp.size());
  std::vector<double> thresholds = gen;
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  struct Pt {
    int64_t accepts, rejects;
  };
  std::vector<Pt> pts;
  for (double th : thresholds) {
    int64_t accepts = imp.end() - std::lower_bound(imp.begin(), imp.end(), th);
    int64_t rejects = std::lower_bound(gen.begin(), gen.end(), th) - gen.begin();
    pts.push_back({accepts, rejects});
  }
  pts.push_back({0, ng});

  struct Frac {
    int64_t num, den;  // canonical: den > 0, gcd reduced
    void canonicalize() {
      if (den < 0) {
        num = -num;
        den = -den;
      }
      int64_t g = std::gcd(num < 0 ? -num : num, den);
      if (g > 0) {
        num /= g;
        den /= g;
      }
    }
    bool less_than(const Frac &o) const {
      return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
    }
  };
  Frac best{1, 1};
  auto consider = [&best](Frac f) {
    f.canonicalize();
    if (f.less_than(best)) best = f;
  };

  // Single operating points: max(FAR, FRR).
  for (const auto &p : pts) {
    Frac far{p.accepts, ni}, frr{p.rejects, ng};
    consider(far.less_than(frr) ? frr : far);
  }
  // Segments whose FAR - FRR changes sign admit an interior crossing.
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j) {
      int64_t da = pts[i].accepts * ng - pts[i].rejects * ni;
      int64_t db = pts[j].accepts * ng - pts[j].rejects * ni;
      if (!(da < 0 && db > 0)) continue;
      consider({da * pts[j].accepts - db * pts[i].accepts, ni * (da - db)});
    }
  return static_cast<double>(best.num) / static_cast<double>(best.den);
}

void criterion_eer_oracle() {
  require(eer({0.9, 0.8, 0.7}, {0.1, 0.2}).eer == 0.0, "separated scores: EER != 0");
  require(eer({0.1, 0.5, 0.9}, {0.1, 0.5, 0.9}).eer == 0.5,
          "identical distributions: EER != 0.5");

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_dist(1, 30);
  std::normal_distribution<double> g(0.5, 1.0), im(-0.5, 1.0);
  std::uniform_int_distribution<int> grid(0, 9);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> gen, imp;
    int ng = n_dist(rng), ni = n_dist(rng);
    bool coarse = rep % 2 == 1;  // half the sets carry tied scores
    for (int i = 0; i < ng; ++i)
      gen.push_back(coarse ? grid(rng) / 10.0 + 0.2 : g(rng));
    for (int i = 0; i < ni; ++i)
      imp.push_back(coarse ? grid(rng) / 10.0 : im(rng));
    double module = eer(gen, imp).eer;
    double oracle = eer_pair_oracle(gen, imp);
    require(module == oracle,
            str_cat("set ", rep, ": module ", module, " != oracle ", oracle));
  }
}

// ---- criterion 8: PLDA ---------------------------------------------------------------

void criterion_plda() {
  // Likelihood monotonicity on 10 random datasets.
  std::mt19937_64 rng(555);
  for (int rep = 0; rep < 10; ++rep) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.4, 2.0);
    double sb0 = unif(rng), sb1 = unif(rng), sw0 = unif(rng), sw1 = unif(rng);
    std::vector<Embedding> data;
    int speakers = 10 + rep;
    for (int s = 0; s < speakers; ++s) {
      double y0 = std::sqrt(sb0) * normal(rng), y1 = std::sqrt(sb1) * normal(rng);
      for (int u = 0; u < 6; ++u) {
        Embedding e;
        e.vec = {y0 + std::sqrt(sw0) * normal(rng), y1 + std::sqrt(sw1) * normal(rng)};
        e.speaker_id = str_cat("spk", s);
        e.utterance_id = str_cat("spk", s, "_", u);
        data.push_back(std::move(e));
      }
    }
    std::vector<double> trace;
    plda_train(data, 20, &trace);
    for (size_t i = 1; i < trace.size(); ++i)
      require(trace[i] >= trace[i - 1] - 1e-8,
              str_cat("dataset ", rep, ": log likelihood fell at iteration ", i));
  }

  // Parameter recovery on generated two-covariance data (D = 2, n = 2000).
  PldaModel truth;
  truth.mean = {0.4, -0.6};
  truth.between = Tensor({2, 2}, {1.8, 0.5, 0.5, 1.1});
  truth.within = Tensor({2, 2}, {0.7, -0.15, -0.15, 0.45});
  std::mt19937_64 gen_rng(777);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto chol2 = [](const Tensor &a) {
    double l11 = std::sqrt(a.at(0, 0));
    double l21 = a.at(1, 0) / l11;
    double l22 = std::sqrt(a.at(1, 1) - l21 * l21);
    return std::array<double, 3>{l11, l21, l22};
  };
  auto lb = chol2(truth.between), lw = chol2(truth.within);
  std::vector<Embedding> data;
  for (int s = 0; s < 200; ++s) {
    double z1 = normal(gen_rng), z2 = normal(gen_rng);
    double y0 = lb[0] * z1, y1 = lb[1] * z1 + lb[2] * z2;
    for (int u = 0; u < 10; ++u) {
      double e1 = normal(gen_rng), e2 = normal(gen_rng);
      Embedding e;
      e.vec = {truth.mean[0] + y0 + lw[0] * e1,
               truth.mean[1] + y1 + lw[1] * e1 + lw[2] * e2};
      e.speaker_id = str_cat("spk", s);
      e.utterance_id = str_cat("spk", s, "_", u);
      data.push_back(std::move(e));
    }
  }
  PldaModel fit = plda_train(data, 50);
  auto frob_rel = [](const Tensor &a, const Tensor &b) {
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    return std::sqrt(num / den);
  };
  double eb = frob_rel(fit.between, truth.between);
  double ew = frob_rel(fit.within, truth.within);
  require(eb < 0.15, str_cat("between-covariance error ", eb));
  require(ew < 0.15, str_cat("within-covariance error ", ew));
}

// ---- criterion 9: WER oracle -----------------------------------------------------------

int64_t recursive_edit_distance(const std::string &ref, const std::string &hyp,
                                size_t i, size_t j) {
  if (i == ref.size()) return static_cast<int64_t>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<int64_t>(ref.size() - i);
  int64_t best = recursive_edit_distance(ref, hyp, i + 1, j + 1) +
                 (ref[i] == hyp[j] ? 0 : 1);
  best = std::min(best, recursive_edit_distance(ref, hyp, i + 1, j) + 1);
  best = std::min(best, recursive_edit_distance(ref, hyp, i, j + 1) + 1);
  return best;
}

void criterion_wer_oracle() {
  std::mt19937_64 rng(2468);
  std::uniform_int_distribution<size_t> len(0, 6);
  std::uniform_int_distribution<int> ch(0, 2);
  auto random_string = [&]() {
    std::string out;
    for (size_t i = 0, n = len(rng); i < n; ++i)
      out.push_back(static_cast<char>('a' + ch(rng)));
    return out;
  };
  for (int rep = 0; rep < 100; ++rep) {
    std::string ref = random_string(), hyp = random_string();
    int64_t got = edit_distance_chars(ref, hyp).total();
    int64_t want = recursive_edit_distance(ref, hyp, 0, 0);
    require(got == want, str_cat("pair ", rep, ": dp ", got, " != recursion ", want));
  }

  require(wer_strings({"a b c", "d e"}, {"a b c", "d e"}) == 0.0, "exact match WER");
  require(std::fabs(wer_strings({"a b c"}, {"a x c"}) - 100.0 / 3.0) < 1e-12,
          "1-of-3 WER");
  require(std::fabs(wer_strings({"a b", "c d e"}, {"a x", "c e"}) -
                    100.0 * 2.0 / 5.0) < 1e-12,
          "pooled WER");
}

// ---- criterion 10: command-level determinism ----------------------------------------------

void criterion_determinism() {
  std::string tmp = (fs::temp_directory_path() / "advasr-acceptance-det").string();
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  auto run_cli = [](const std::vector<std::string> &args) {
    std::ostringstream out, err;
    int code = cli_run(args, out, err);
    if (code != 0)
      throw CheckFailure("cli failed (" + std::to_string(code) + "): " + err.str());
  };
  auto slurp = [](const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckFailure("missing " + path);
    return std::string{std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>()};
  };

  std::vector<std::string> tiny = {
      "--set", "corpus.num_speakers=5",   "--set", "corpus.utts_per_speaker=5",
      "--set", "corpus.open_speakers=0",  "--set", "corpus.feature_dim=6",
      "--set", "corpus.vocab=abc",        "--set", "corpus.min_symbols=2",
      "--set", "corpus.max_symbols=3",    "--set", "corpus.min_seg_frames=6",
      "--set", "corpus.max_seg_frames=8", "--set", "model.encoder_hidden=6",
      "--set", "model.encoder_layers=1",  "--set", "model.attn_hidden=6",
      "--set", "model.attn_dim=6",        "--set", "model.attn_embed_dim=4",
      "--set", "model.adversary_hidden=6", "--seed", "2026"};
  auto with = [&tiny](std::vector<std::string> args) {
    args.insert(args.end(), tiny.begin(), tiny.end());
    return args;
  };

  run_cli(with({"synth-data", "--out", tmp + "/corpus"}));
  for (const char *leg : {"a", "b"}) {
    std::string dir = tmp + "/" + leg;
    run_cli(with({"train", "--corpus", tmp + "/corpus", "--stage", "pretrain-asr",
                  "--epochs", "3", "--out", dir + "/s1"}));
    run_cli(with({"train", "--corpus", tmp + "/corpus", "--stage", "pretrain-adv",
                  "--resume", dir + "/s1/checkpoint.bin", "--epochs", "2", "--out",
                  dir + "/s2"}));
    run_cli(with({"train", "--corpus", tmp + "/corpus", "--stage", "joint",
                  "--alpha", "0.5", "--resume", dir + "/s2/checkpoint.bin",
                  "--epochs", "2", "--out", dir + "/s3"}));
  }
  for (const char *stage : {"s1", "s2", "s3"}) {
    require(slurp(tmp + "/a/" + stage + "/checkpoint.bin") ==
                slurp(tmp + "/b/" + stage + "/checkpoint.bin"),
            str_cat("checkpoint bytes differ at ", stage));
    require(slurp(tmp + "/a/" + stage + "/loss.csv") ==
                slurp(tmp + "/b/" + stage + "/loss.csv"),
            str_cat("loss csv differs at ", stage));
  }
  fs::remove_all(tmp);
}

// ---- criterion 11: padding invariance ---------------------------------------------------

void criterion_padding_invariance() {
  CorpusConfig cc = overfit_corpus_config();
  cc.seed = 3141;
  Corpus corpus = generate_synthetic_corpus(cc);
  Model model(desk_model_config(), corpus.vocab(), SpeakerTable({"spk000", "spk001",
                                                                 "spk002", "spk003"}),
              777);

  EmbeddingNetConfig ec;
  ec.input_dim = 16;
  ec.frame_hidden = 8;
  ec.embed_dim = 4;
  ec.seed = 777;
  ec.epochs = 0;
  std::mt19937_64 embed_rng(sub_seed(777, "embed-init"));
  EmbeddingNet net(ec, SpeakerTable({"a", "b"}), embed_rng);

  int checked = 0;
  for (const auto &u : corpus.utterances) {
    if (checked >= 20) break;
    ++checked;

    int64_t t_len = u.features.rows();
    Tensor padded({t_len + 7, u.features.cols()});
    std::copy(u.features.data(), u.features.data() + u.features.numel(),
              padded.data());
    for (int64_t i = u.features.numel(); i < padded.numel(); ++i) padded[i] = 1e6;
    Mask mask(static_cast<size_t>(t_len + 7), 0);
    std::fill(mask.begin(), mask.begin() + static_cast<size_t>(t_len), 1);

    auto losses = [&](const Tensor &feats, const Mask &m) {
      Tape tape;
      auto [phi, sub_mask] = model.encoder.forward(tape, feats, m);
      int64_t n_valid = prefix_length(sub_mask);
      double l_ctc = scalar_value(ctc_loss(model.ctc.log_probs(tape, phi),
                                           model.vocab.ctc_targets(u.transcript),
                                           n_valid));
      double l_attn = scalar_value(model.attention.loss(
          tape, phi, sub_mask, model.vocab.attn_targets(u.transcript)));
      double l_spk = scalar_value(adversary_loss(
          model.adversary.forward(tape, phi, sub_mask),
          model.speakers.class_of(u.speaker_id), sub_mask));
      return std::array<double, 3>{l_ctc, l_attn, l_spk};
    };
    auto base = losses(u.features, all_valid(t_len));
    auto pad = losses(padded, mask);
    for (int k = 0; k < 3; ++k)
      require(std::fabs(base[static_cast<size_t>(k)] - pad[static_cast<size_t>(k)]) <= 1e-9,
              str_cat(u.id, ": loss ", k, " changed by ",
                      std::fabs(base[static_cast<size_t>(k)] - pad[static_cast<size_t>(k)])));

    Embedding ea = net.extract(u.features, all_valid(t_len), u.id);
    Embedding eb = net.extract(padded, mask, u.id);
    for (size_t k = 0; k < ea.vec.size(); ++k)
      require(std::fabs(ea.vec[k] - eb.vec[k]) <= 1e-9,
              str_cat(u.id, ": embedding moved under padding"));
  }
  require(checked == 20, "expected 20 utterances");
}

// ---- runner -------------------------------------------------------------------------------

struct Criterion {
  int id;
  const char *title;
  double budget_seconds;
  std::function<void()> body;
};

}  // namespace
}  // namespace advasr

int main(int argc, char **argv) {
  using namespace advasr;

  std::vector<Criterion> criteria = {
      {1, "CTC loss equals brute-force path enumeration (200 instances)", 60,
       criterion_ctc_oracle},
      {2, "gradient suite: layers and all three losses vs finite differences", 300,
       criterion_gradient_suite},
      {3, "gradient-reversal contract: g_e = g_asr - alpha * g_spk", 300,
       [] {
         // Realized as an independent two-pass decomposition on a real batch.
         CorpusConfig cc = overfit_corpus_config();
         cc.seed = 999;
         Corpus corpus = generate_synthetic_corpus(cc);
         for (auto &u : corpus.utterances) u.split = "train-adv";
         Model model(desk_model_config(), corpus.vocab(),
                     corpus.closed_speaker_table(), 333);
         auto batches = make_batches(corpus.split("train-adv"), 6);
         TrainConfig tc;
         tc.stage = Stage::kJoint;

         for (double alpha : {0.0, 0.5, 2.0}) {
           tc.alpha = alpha;
           auto grads_of = [&](bool with_asr, bool with_adv, bool reversed) {
             Tape tape;
             std::vector<Var> terms;
             for (size_t i = 0; i < batches[0].members.size(); ++i) {
               auto [phi, sub_mask] = model.encoder.forward(
                   tape, batches[0].features[i], batches[0].masks[i]);
               int64_t n_valid = prefix_length(sub_mask);
               if (with_asr) {
                 Var lp = model.ctc.log_probs(tape, phi);
                 Var l_c = ctc_loss(lp, model.vocab.ctc_targets(
                                            batches[0].members[i]->transcript),
                                    n_valid);
                 Var l_a = model.attention.loss(
                     tape, phi, sub_mask,
                     model.vocab.attn_targets(batches[0].members[i]->transcript));
                 terms.push_back(asr_loss(l_c, l_a, 0.5));
               }
               if (with_adv) {
                 Var adv_in = reversed ? gradient_reversal(phi, alpha) : phi;
                 terms.push_back(adversary_loss(
                     model.adversary.forward(tape, adv_in, sub_mask),
                     model.speakers.class_of(batches[0].members[i]->speaker_id),
                     sub_mask));
               }
             }
             Var root = scale(sum(stack_scalars(terms)),
                              1.0 / static_cast<double>(batches[0].members.size()));
             backward(root);
             tape.accumulate_param_grads();
             std::map<std::string, Tensor> out;
             for (Param *p : model.group("encoder")) out[p->name] = p->grad;
             for (Param *p : model.all_params()) p->zero_grad();
             return out;
           };
           // Means over terms differ between passes (ASR+adv terms pooled
           // together), so build each loss with its own normalization.
           auto joint = grads_of(true, true, true);
           auto asr_only = grads_of(true, false, false);
           auto adv_only = grads_of(false, true, false);
           for (const auto &[name, g] : joint) {
             const Tensor &ga = asr_only.at(name);
             const Tensor &gs = adv_only.at(name);
             for (int64_t i = 0; i < g.numel(); ++i) {
               double want = ga[i] - alpha * gs[i];
               require(std::fabs(g[i] - want) <= 1e-9,
                       str_cat("alpha ", alpha, ", ", name, "[", i, "]: got ", g[i],
                               " want ", want));
             }
           }
         }
       }},
      {4, "alpha = 0 overfit: training-set CER <= 2% within 200 epochs", 600,
       criterion_overfit},
      {5, "closed-set ACC collapses by >= 30 points at alpha = 2 (median of 3 seeds)",
       1800, criterion_acc_collapse},
      {6, "pooled EER does not improve by more than 5 points (median of 3 seeds)",
       1800, criterion_eer_bounded},
      {7, "EER equals the exhaustive threshold-sweep oracle exactly", 60,
       criterion_eer_oracle},
      {8, "PLDA: EM likelihood monotone; covariances recovered within 15%", 300,
       criterion_plda},
      {9, "edit distance equals exhaustive recursion; pooled WER hand cases", 60,
       criterion_wer_oracle},
      {10, "cmd_train is byte-deterministic under a fixed config and seed", 300,
       criterion_determinism},
      {11, "losses and embeddings are padding-invariant (20 utterances)", 300,
       criterion_padding_invariance},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      wanted.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 64;
    }
  }

  int failures = 0;
  for (const auto &c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    std::string verdict = "PASS", detail;
    try {
      c.body();
    } catch (const std::exception &e) {
      verdict = "FAIL";
      detail = e.what();
      ++failures;
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0).count();
    if (verdict == "PASS" && secs > c.budget_seconds) {
      verdict = "FAIL";
      detail = str_cat("over time budget: ", secs, "s > ", c.budget_seconds, "s");
      ++failures;
    }
    std::printf("[%s] criterion %2d (%.1fs): %s%s%s\n", verdict.c_str(), c.id, secs,
                c.title, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
