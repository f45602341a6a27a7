// src/speaker-eval.cc

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

#include "advasr/speaker-eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "advasr/data.h"

namespace advasr {

namespace {
constexpr double kPi = 3.14159265358979323846;

double l2_norm(const std::vector<double> &v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}
}  // namespace

Embedding length_normalize(const Embedding &e) {
  double norm = l2_norm(e.vec);
  if (norm < 1e-12)
    throw NumericError("embedding: cannot length-normalize a zero vector");
  Embedding out = e;
  for (double &x : out.vec) x /= norm;
  return out;
}

double cosine_score(const Embedding &enrollment, const Embedding &test) {
  if (enrollment.vec.size() != test.vec.size())
    throw ShapeError(str_cat("cosine: dimension mismatch ", enrollment.vec.size(),
                             " vs ", test.vec.size()));
  double na = l2_norm(enrollment.vec), nb = l2_norm(test.vec);
  if (na < 1e-12 || nb < 1e-12)
    throw NumericError("cosine: zero-norm embedding");
  double dot = 0.0;
  for (size_t i = 0; i < test.vec.size(); ++i)
    dot += enrollment.vec[i] * test.vec[i];
  return dot / (na * nb);
}

Embedding enroll(const std::vector<Embedding> &utterance_embeddings) {
  if (utterance_embeddings.empty()) throw DataError("enroll: no embeddings");
  Embedding model;
  model.speaker_id = utterance_embeddings.front().speaker_id;
  model.utterance_id = "enrollment";
  model.vec.assign(utterance_embeddings.front().vec.size(), 0.0);
  for (const auto &e : utterance_embeddings) {
    Embedding n = length_normalize(e);
    if (n.vec.size() != model.vec.size())
      throw ShapeError("enroll: embedding dimension mismatch");
    for (size_t i = 0; i < n.vec.size(); ++i) model.vec[i] += n.vec[i];
  }
  for (double &x : model.vec)
    x /= static_cast<double>(utterance_embeddings.size());
  return length_normalize(model);
}

// -- Embedding network ----------------------------------------------------------

void EmbeddingNetConfig::validate() const {
  if (input_dim <= 0 || frame_hidden <= 0 || embed_dim <= 0)
    throw DataError("embedding net: dimensions must be positive");
  if (epochs < 0 || batch_size < 1 || lr <= 0)
    throw DataError("embedding net: bad training settings");
}

EmbeddingNet::EmbeddingNet(const EmbeddingNetConfig &config,
                           const SpeakerTable &table, std::mt19937_64 &rng)
    : cfg(config),
      speakers(table),
      frame1("embed.frame1", config.input_dim, config.frame_hidden, rng),
      frame2("embed.frame2", config.frame_hidden, config.frame_hidden, rng),
      bottleneck("embed.bottleneck", 2 * config.frame_hidden, config.embed_dim, rng),
      classifier("embed.classifier", config.embed_dim, table.size(), rng) {
  cfg.validate();
  if (table.size() < 2)
    throw DataError("embedding net: need at least 2 speakers");
}

Var EmbeddingNet::embed_graph(Tape &tape, const Tensor &features, const Mask &mask) {
  if (features.rows() == 0) throw ShapeError("embedding net: empty input");
  if (features.cols() != cfg.input_dim)
    throw ShapeError(str_cat("embedding net: input dim ", features.cols(),
                             " != configured ", cfg.input_dim));
  Var h = advasr::tanh(frame1.apply(tape, make_const(features)));
  h = advasr::tanh(frame2.apply(tape, h));
  Var pooled = stats_pool(h, mask);
  return bottleneck.apply(tape, pooled);
}

Embedding EmbeddingNet::extract(const Tensor &features, const Mask &mask,
                                const std::string &utterance_id,
                                const std::string &speaker_id) {
  Tape tape;
  Var emb = embed_graph(tape, features, mask);
  Embedding out;
  out.vec = emb->value.values();
  out.utterance_id = utterance_id;
  out.speaker_id = speaker_id;
  return out;
}

int64_t EmbeddingNet::classify(const Tensor &features, const Mask &mask) {
  Tape tape;
  Var logits = classifier.apply(tape, embed_graph(tape, features, mask));
  int64_t best = 0;
  for (int64_t k = 1; k < logits->cols(); ++k)
    if (logits->value[k] > logits->value[best]) best = k;
  return best;
}

void EmbeddingNet::visit(const ParamVisitor &fn) {
  frame1.visit(fn);
  frame2.visit(fn);
  bottleneck.visit(fn);
  classifier.visit(fn);
}

EmbeddingNet train_embedding_net(const std::vector<SeqExample> &examples,
                                 const EmbeddingNetConfig &config) {
  config.validate();
  if (examples.empty()) throw DataError("embedding net: no training examples");

  std::set<std::string> speaker_set;
  for (const auto &ex : examples) speaker_set.insert(ex.speaker_id);
  if (speaker_set.size() < 2)
    throw DataError("embedding net: single-speaker dataset");
  SpeakerTable table({speaker_set.begin(), speaker_set.end()});

  std::mt19937_64 init_rng(sub_seed(config.seed, "embed-init"));
  EmbeddingNet net(config, table, init_rng);

  std::vector<Param *> params;
  net.visit([&params](Param &p) { params.push_back(&p); });
  AdamOptimizer opt({.lr = config.lr});

  std::mt19937_64 shuffle_rng(sub_seed(config.seed, "embed-shuffle"));
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      Tape tape;
      std::vector<Var> losses;
      for (size_t i = start; i < end; ++i) {
        const SeqExample &ex = examples[order[i]];
        Var emb = net.embed_graph(tape, *ex.features, ex.mask);
        Var logp = log_softmax_rows(net.classifier.apply(tape, emb));
        losses.push_back(neg(pick(logp, 0, table.class_of(ex.speaker_id))));
      }
      Var loss = scale(sum(stack_scalars(losses)),
                       1.0 / static_cast<double>(losses.size()));
      backward(loss);
      tape.accumulate_param_grads();
      opt.step(params);
    }
  }
  return net;
}

// -- Small symmetric linear algebra ----------------------------------------------

namespace {

// Lower Cholesky factor of a symmetric positive-definite matrix.
Tensor cholesky(const Tensor &a, const char *what) {
  int64_t d = a.rows();
  Tensor l({d, d});
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j <= i; ++j) {
      double acc = a.at(i, j);
      for (int64_t k = 0; k < j; ++k) acc -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (acc <= 0.0)
          throw NumericError(str_cat(what,
                                     ": covariance is not positive definite "
                                     "(rank collapse); reduce the embedding "
                                     "dimension"));
        l.at(i, i) = std::sqrt(acc);
      } else {
        l.at(i, j) = acc / l.at(j, j);
      }
    }
  }
  return l;
}

std::vector<double> chol_solve(const Tensor &l, const std::vector<double> &b) {
  int64_t d = l.rows();
  std::vector<double> y(static_cast<size_t>(d)), x(static_cast<size_t>(d));
  for (int64_t i = 0; i < d; ++i) {
    double acc = b[static_cast<size_t>(i)];
    for (int64_t k = 0; k < i; ++k) acc -= l.at(i, k) * y[static_cast<size_t>(k)];
    y[static_cast<size_t>(i)] = acc / l.at(i, i);
  }
  for (int64_t i = d - 1; i >= 0; --i) {
    double acc = y[static_cast<size_t>(i)];
    for (int64_t k = i + 1; k < d; ++k) acc -= l.at(k, i) * x[static_cast<size_t>(k)];
    x[static_cast<size_t>(i)] = acc / l.at(i, i);
  }
  return x;
}

Tensor chol_inverse(const Tensor &l) {
  int64_t d = l.rows();
  Tensor inv({d, d});
  std::vector<double> e(static_cast<size_t>(d), 0.0);
  for (int64_t j = 0; j < d; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[static_cast<size_t>(j)] = 1.0;
    auto col = chol_solve(l, e);
    for (int64_t i = 0; i < d; ++i) inv.at(i, j) = col[static_cast<size_t>(i)];
  }
  return inv;
}

double chol_logdet(const Tensor &l) {
  double acc = 0.0;
  for (int64_t i = 0; i < l.rows(); ++i) acc += std::log(l.at(i, i));
  return 2.0 * acc;
}

Tensor sym_add(const Tensor &a, const Tensor &b, double sb = 1.0) {
  Tensor out = a;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += sb * b[i];
  return out;
}

void symmetrize(Tensor &a) {
  for (int64_t i = 0; i < a.rows(); ++i)
    for (int64_t j = 0; j < i; ++j) {
      double v = 0.5 * (a.at(i, j) + a.at(j, i));
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
}

struct SpeakerGroup {
  std::vector<const std::vector<double> *> xs;
};

std::map<std::string, SpeakerGroup> group_by_speaker(
    const std::vector<Embedding> &embeddings) {
  std::map<std::string, SpeakerGroup> groups;
  for (const auto &e : embeddings) {
    if (e.speaker_id.empty())
      throw DataError("plda: embedding without a speaker label");
    groups[e.speaker_id].xs.push_back(&e.vec);
  }
  return groups;
}

}  // namespace

double plda_joint_log_likelihood(const PldaModel &model,
                                 const std::vector<const std::vector<double> *> &xs) {
  const int64_t d = static_cast<int64_t>(model.mean.size());
  const int64_t n = static_cast<int64_t>(xs.size());
  if (n == 0) throw DataError("plda: empty observation set");
  for (const auto *x : xs)
    if (static_cast<int64_t>(x->size()) != d)
      throw ShapeError("plda: dimension mismatch");

  Tensor lw = cholesky(model.within, "plda within");
  Tensor lb = cholesky(model.between, "plda between");
  Tensor w_inv = chol_inverse(lw);
  Tensor b_inv = chol_inverse(lb);

  // Posterior precision of the shared latent: B^-1 + n W^-1.
  Tensor prec = sym_add(b_inv, w_inv, static_cast<double>(n));
  Tensor lp = cholesky(prec, "plda posterior");

  std::vector<double> s(static_cast<size_t>(d), 0.0);
  double quad = 0.0;
  for (const auto *x : xs) {
    std::vector<double> c(static_cast<size_t>(d));
    for (int64_t k = 0; k < d; ++k)
      c[static_cast<size_t>(k)] = (*x)[static_cast<size_t>(k)] - model.mean[static_cast<size_t>(k)];
    auto wc = chol_solve(lw, c);  // (L L^T)^-1 c
    for (int64_t k = 0; k < d; ++k) {
      quad += c[static_cast<size_t>(k)] * wc[static_cast<size_t>(k)];
      s[static_cast<size_t>(k)] += wc[static_cast<size_t>(k)];
    }
  }
  // Posterior mean solves prec * m = W^-1 * sum(c).
  auto m = chol_solve(lp, s);
  double m_quad = 0.0;
  for (int64_t k = 0; k < d; ++k) m_quad += m[static_cast<size_t>(k)] * s[static_cast<size_t>(k)];

  return -0.5 * (static_cast<double>(n * d) * std::log(2.0 * kPi) +
                 static_cast<double>(n) * chol_logdet(lw) + chol_logdet(lb) +
                 chol_logdet(lp) + quad - m_quad);
}

namespace {

double dataset_log_likelihood(const PldaModel &model,
                              const std::map<std::string, SpeakerGroup> &groups) {
  double ll = 0.0;
  for (const auto &[spk, g] : groups) {
    (void)spk;
    ll += plda_joint_log_likelihood(model, g.xs);
  }
  return ll;
}

}  // namespace

PldaModel plda_em_iterate(const PldaModel &init,
                          const std::vector<Embedding> &embeddings,
                          int64_t iterations, std::vector<double> *loglik) {
  auto groups = group_by_speaker(embeddings);
  const int64_t d = static_cast<int64_t>(init.mean.size());
  int64_t total = 0;
  for (const auto &[spk, g] : groups) {
    (void)spk;
    total += static_cast<int64_t>(g.xs.size());
  }

  PldaModel model = init;
  if (loglik) loglik->clear();
  for (int64_t it = 0; it < iterations; ++it) {
    if (loglik) loglik->push_back(dataset_log_likelihood(model, groups));

    Tensor lw = cholesky(model.within, "plda within");
    Tensor lb = cholesky(model.between, "plda between");
    Tensor w_inv = chol_inverse(lw);
    Tensor b_inv = chol_inverse(lb);

    Tensor new_b({d, d}), new_w({d, d});
    for (const auto &[spk, g] : groups) {
      (void)spk;
      int64_t n = static_cast<int64_t>(g.xs.size());
      Tensor prec = sym_add(b_inv, w_inv, static_cast<double>(n));
      Tensor lp = cholesky(prec, "plda posterior");
      Tensor post_cov = chol_inverse(lp);

      std::vector<double> s(static_cast<size_t>(d), 0.0);
      for (const auto *x : g.xs) {
        std::vector<double> c(static_cast<size_t>(d));
        for (int64_t k = 0; k < d; ++k)
          c[static_cast<size_t>(k)] =
              (*x)[static_cast<size_t>(k)] - model.mean[static_cast<size_t>(k)];
        auto wc = chol_solve(lw, c);
        for (int64_t k = 0; k < d; ++k) s[static_cast<size_t>(k)] += wc[static_cast<size_t>(k)];
      }
      auto y_hat = chol_solve(lp, s);

      for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j)
          new_b.at(i, j) += post_cov.at(i, j) +
                            y_hat[static_cast<size_t>(i)] * y_hat[static_cast<size_t>(j)];

      for (const auto *x : g.xs) {
        std::vector<double> r(static_cast<size_t>(d));
        for (int64_t k = 0; k < d; ++k)
          r[static_cast<size_t>(k)] = (*x)[static_cast<size_t>(k)] -
                                      model.mean[static_cast<size_t>(k)] -
                                      y_hat[static_cast<size_t>(k)];
        for (int64_t i = 0; i < d; ++i)
          for (int64_t j = 0; j < d; ++j)
            new_w.at(i, j) += r[static_cast<size_t>(i)] * r[static_cast<size_t>(j)] +
                              post_cov.at(i, j);
      }
    }
    for (int64_t i = 0; i < new_b.numel(); ++i) {
      new_b[i] /= static_cast<double>(groups.size());
      new_w[i] /= static_cast<double>(total);
    }
    symmetrize(new_b);
    symmetrize(new_w);
    model.between = new_b;
    model.within = new_w;
  }
  if (loglik) loglik->push_back(dataset_log_likelihood(model, groups));
  return model;
}

PldaModel plda_train(const std::vector<Embedding> &embeddings, int64_t iterations,
                     std::vector<double> *loglik) {
  auto groups = group_by_speaker(embeddings);
  if (groups.size() < 2) throw DataError("plda: need at least 2 speakers");
  bool any_multi = false;
  for (const auto &[spk, g] : groups) {
    (void)spk;
    any_multi |= g.xs.size() >= 2;
  }
  if (!any_multi)
    throw DataError("plda: need a speaker with at least 2 utterances");

  const int64_t d = static_cast<int64_t>(embeddings.front().vec.size());
  int64_t total = 0;

  PldaModel model;
  model.mean.assign(static_cast<size_t>(d), 0.0);
  for (const auto &e : embeddings) {
    if (static_cast<int64_t>(e.vec.size()) != d)
      throw ShapeError("plda: dimension mismatch in training embeddings");
    for (int64_t k = 0; k < d; ++k) model.mean[static_cast<size_t>(k)] += e.vec[static_cast<size_t>(k)];
    ++total;
  }
  for (double &v : model.mean) v /= static_cast<double>(total);

  // Moment initialization: within/between scatters plus a small ridge.
  Tensor within({d, d}), between({d, d});
  for (const auto &[spk, g] : groups) {
    (void)spk;
    std::vector<double> m(static_cast<size_t>(d), 0.0);
    for (const auto *x : g.xs)
      for (int64_t k = 0; k < d; ++k) m[static_cast<size_t>(k)] += (*x)[static_cast<size_t>(k)];
    for (double &v : m) v /= static_cast<double>(g.xs.size());
    for (int64_t i = 0; i < d; ++i)
      for (int64_t j = 0; j < d; ++j)
        between.at(i, j) += static_cast<double>(g.xs.size()) *
                            (m[static_cast<size_t>(i)] - model.mean[static_cast<size_t>(i)]) *
                            (m[static_cast<size_t>(j)] - model.mean[static_cast<size_t>(j)]);
    for (const auto *x : g.xs)
      for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j)
          within.at(i, j) += ((*x)[static_cast<size_t>(i)] - m[static_cast<size_t>(i)]) *
                             ((*x)[static_cast<size_t>(j)] - m[static_cast<size_t>(j)]);
  }
  double trace = 0.0;
  for (int64_t i = 0; i < d; ++i)
    trace += within.at(i, i) + between.at(i, i);
  // Scale-relative ridge only: fully collapsed scatter must fail, not limp on.
  double ridge = 1e-6 * trace / static_cast<double>(d);
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j < d; ++j) {
      between.at(i, j) /= static_cast<double>(total);
      within.at(i, j) /= static_cast<double>(total);
    }
    between.at(i, i) += ridge;
    within.at(i, i) += ridge;
  }
  model.between = between;
  model.within = within;
  cholesky(model.within, "plda within");  // fail fast on rank collapse

  return plda_em_iterate(model, embeddings, iterations, loglik);
}

double plda_score(const PldaModel &model, const Embedding &enrollment,
                  const Embedding &test) {
  if (enrollment.vec.size() != model.mean.size() ||
      test.vec.size() != model.mean.size())
    throw ShapeError("plda score: dimension mismatch");
  double joint = plda_joint_log_likelihood(model, {&enrollment.vec, &test.vec});
  double singles = plda_joint_log_likelihood(model, {&enrollment.vec}) +
                   plda_joint_log_likelihood(model, {&test.vec});
  return joint - singles;
}

// -- EER --------------------------------------------------------------------------

EerResult eer(const std::vector<double> &genuine,
              const std::vector<double> &impostor) {
  if (genuine.empty() || impostor.empty())
    throw DataError("eer: empty score list");

  std::vector<double> gen = genuine, imp = impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  const int64_t ng = static_cast<int64_t>(gen.size());
  const int64_t ni = static_cast<int64_t>(imp.size());

  std::vector<double> thresholds = gen;
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  // Counts are kept exact so the crossing reduces to one canonical fraction.
  struct Pt {
    int64_t accepts;  // impostors at or above the threshold
    int64_t rejects;  // genuines below the threshold
    double th;
  };
  EerResult result;
  std::vector<Pt> pts;
  for (double th : thresholds) {
    int64_t accepts = imp.end() - std::lower_bound(imp.begin(), imp.end(), th);
    int64_t rejects = std::lower_bound(gen.begin(), gen.end(), th) - gen.begin();
    result.roc.push_back({th, static_cast<double>(accepts) / static_cast<double>(ni),
                          static_cast<double>(rejects) / static_cast<double>(ng)});
    pts.push_back({accepts, rejects, th});
  }
  pts.push_back({0, ng, thresholds.back()});  // reject-all corner

  // Best (lowest) FRR per distinct FAR, FAR ascending.
  std::sort(pts.begin(), pts.end(), [](const Pt &a, const Pt &b) {
    if (a.accepts != b.accepts) return a.accepts < b.accepts;
    if (a.rejects != b.rejects) return a.rejects < b.rejects;
    return a.th < b.th;
  });
  std::vector<Pt> frontier;
  for (const auto &p : pts)
    if (frontier.empty() || p.accepts != frontier.back().accepts)
      frontier.push_back(p);

  // Lower convex hull; integer cross products keep the geometry exact.
  std::vector<Pt> hull;
  for (const auto &p : frontier) {
    while (hull.size() >= 2) {
      const Pt &a = hull[hull.size() - 2];
      const Pt &b = hull[hull.size() - 1];
      if ((b.rejects - a.rejects) * (p.accepts - b.accepts) >=
          (p.rejects - b.rejects) * (b.accepts - a.accepts))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }

  // Walk the hull: FAR - FRR goes from negative to positive as FAR rises.
  auto diff_of = [ng, ni](const Pt &p) { return p.accepts * ng - p.rejects * ni; };
  int64_t num = 1, den = 2;  // only reachable when a bracket never appears
  double th_at = hull.front().th;
  for (size_t k = 0; k < hull.size(); ++k) {
    int64_t diff = diff_of(hull[k]);
    if (diff == 0) {
      num = hull[k].accepts;
      den = ni;
      th_at = hull[k].th;
      break;
    }
    if (diff > 0) {
      const Pt &a = hull[k - 1];  // k > 0: the far = 0 corner has diff <= 0
      const Pt &b = hull[k];
      int64_t da = diff_of(a), db = diff;
      num = da * b.accepts - db * a.accepts;
      den = ni * (da - db);
      double lambda = static_cast<double>(da) / static_cast<double>(da - db);
      th_at = a.th + lambda * (b.th - a.th);
      break;
    }
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 0) {
    num /= g;
    den /= g;
  }
  result.eer = static_cast<double>(num) / static_cast<double>(den);
  result.threshold = th_at;
  return result;
}

double closed_set_accuracy(const std::vector<int64_t> &decisions,
                           const std::vector<int64_t> &labels) {
  if (decisions.size() != labels.size())
    throw DataError(str_cat("accuracy: ", decisions.size(), " decisions vs ",
                            labels.size(), " labels"));
  if (decisions.empty()) throw DataError("accuracy: empty decision list");
  int64_t correct = 0;
  for (size_t i = 0; i < decisions.size(); ++i) correct += decisions[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(decisions.size());
}

void save_embeddings_file(const std::string &path,
                          const std::vector<Embedding> &embeddings) {
  if (embeddings.empty()) throw DataError("embedding file: nothing to write");
  uint64_t count = embeddings.size();
  uint64_t dim = embeddings.front().vec.size();
  std::string blob;
  blob.append(reinterpret_cast<const char *>(&count), sizeof(count));
  blob.append(reinterpret_cast<const char *>(&dim), sizeof(dim));
  std::string ids;
  for (const auto &e : embeddings) {
    if (e.vec.size() != dim)
      throw ShapeError("embedding file: inconsistent dimensions");
    blob.append(reinterpret_cast<const char *>(e.vec.data()),
                static_cast<size_t>(dim) * sizeof(double));
    ids += e.utterance_id + "\n";
  }
  write_file_atomic(path, blob);
  write_file_atomic(path + ".ids", ids);
}

std::vector<Embedding> load_embeddings_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("embedding file: cannot read " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < 16) throw DataError("embedding file: truncated header");
  uint64_t count = 0, dim = 0;
  std::copy_n(blob.data(), sizeof(count), reinterpret_cast<char *>(&count));
  std::copy_n(blob.data() + 8, sizeof(dim), reinterpret_cast<char *>(&dim));
  if (blob.size() != 16 + count * dim * sizeof(double))
    throw DataError("embedding file: size mismatch");

  std::vector<std::string> ids;
  {
    std::ifstream ids_in(path + ".ids");
    std::string line;
    while (ids_in && std::getline(ids_in, line)) ids.push_back(line);
  }
  std::vector<Embedding> out;
  for (uint64_t i = 0; i < count; ++i) {
    Embedding e;
    e.vec.resize(static_cast<size_t>(dim));
    std::copy_n(blob.data() + 16 + i * dim * sizeof(double), dim * sizeof(double),
                reinterpret_cast<char *>(e.vec.data()));
    if (i < ids.size()) e.utterance_id = ids[static_cast<size_t>(i)];
    out.push_back(std::move(e));
  }
  return out;
}

double silhouette_cosine(const std::vector<std::vector<double>> &points,
                         const std::vector<int64_t> &labels) {
  if (points.size() != labels.size())
    throw DataError("silhouette: points/labels length mismatch");
  if (points.empty()) throw DataError("silhouette: no points");

  std::map<int64_t, std::vector<size_t>> clusters;
  for (size_t i = 0; i < labels.size(); ++i) clusters[labels[i]].push_back(i);
  if (clusters.size() < 2)
    throw DataError("silhouette: need at least 2 clusters");
  bool any_multi = false;
  for (const auto &[label, members] : clusters) {
    (void)label;
    any_multi |= members.size() >= 2;
  }
  if (!any_multi)
    throw DataError("silhouette: need a cluster with at least 2 points");

  auto cos_dist = [&points](size_t i, size_t j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (size_t k = 0; k < points[i].size(); ++k) {
      dot += points[i][k] * points[j][k];
      ni += points[i][k] * points[i][k];
      nj += points[j][k] * points[j][k];
    }
    double denom = std::sqrt(ni) * std::sqrt(nj);
    if (denom < 1e-300) throw NumericError("silhouette: zero-norm point");
    return 1.0 - dot / denom;
  };

  double total = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto &own = clusters[labels[i]];
    if (own.size() == 1) continue;  // singleton contributes s = 0
    double a = 0.0;
    for (size_t j : own)
      if (j != i) a += cos_dist(i, j);
    a /= static_cast<double>(own.size() - 1);

    double b = 1e300;
    for (const auto &[label, members] : clusters) {
      if (label == labels[i]) continue;
      double m = 0.0;
      for (size_t j : members) m += cos_dist(i, j);
      b = std::min(b, m / static_cast<double>(members.size()));
    }
    double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(points.size());
}

}  // namespace advasr
