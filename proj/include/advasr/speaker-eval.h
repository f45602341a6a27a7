// include/advasr/speaker-eval.h

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

#ifndef ADVASR_SPEAKER_EVAL_H_
#define ADVASR_SPEAKER_EVAL_H_

#include <string>
#include <vector>

#include "advasr/adversary.h"
#include "advasr/layers.h"
#include "advasr/optimizer.h"

namespace advasr {

struct Embedding {
  std::vector<double> vec;
  std::string utterance_id;
  std::string speaker_id;  // may be empty for test-side embeddings
};

/// Unit-L2 copy; a near-zero norm is an error.
Embedding length_normalize(const Embedding &e);

double cosine_score(const Embedding &enrollment, const Embedding &test);

/// Enrollment model: mean of length-normalized embeddings, re-normalized.
Embedding enroll(const std::vector<Embedding> &utterance_embeddings);

// -- Toy x-vector analogue ----------------------------------------------------

struct EmbeddingNetConfig {
  int64_t input_dim = 0;
  int64_t frame_hidden = 24;
  int64_t embed_dim = 8;
  double lr = 1e-2;
  int64_t epochs = 30;
  int64_t batch_size = 8;
  uint64_t seed = 1;

  void validate() const;
};

struct SeqExample {
  const Tensor *features = nullptr;  // borrowed, T x input_dim
  Mask mask;
  std::string speaker_id;
  std::string utterance_id;
};

/// Frame stack -> statistics pooling -> linear bottleneck (the embedding)
/// -> softmax speaker classifier.  The attacker trains this on whatever
/// representation it is handed, raw features or encoded frames alike.
struct EmbeddingNet {
  EmbeddingNetConfig cfg;
  SpeakerTable speakers;
  Linear frame1, frame2;  // tanh frame layers
  Linear bottleneck;      // 2*frame_hidden -> embed_dim
  Linear classifier;      // embed_dim -> |speakers|

  EmbeddingNet() = default;
  EmbeddingNet(const EmbeddingNetConfig &config, const SpeakerTable &table,
               std::mt19937_64 &rng);

  /// Pre-softmax bottleneck activation, [1 x embed_dim].
  Var embed_graph(Tape &tape, const Tensor &features, const Mask &mask);
  Embedding extract(const Tensor &features, const Mask &mask,
                    const std::string &utterance_id,
                    const std::string &speaker_id = "");
  int64_t classify(const Tensor &features, const Mask &mask);
  void visit(const ParamVisitor &fn);
};

EmbeddingNet train_embedding_net(const std::vector<SeqExample> &examples,
                                 const EmbeddingNetConfig &config);

// -- PLDA ----------------------------------------------------------------------

/// Two-covariance model: x = mu + y + eps with y ~ N(0, between) per speaker
/// and eps ~ N(0, within) per utterance.
struct PldaModel {
  std::vector<double> mean;
  Tensor between;  // D x D, symmetric PSD
  Tensor within;   // D x D, symmetric PD
};

/// EM from a moment-based initialization.  The per-iteration training data
/// log likelihood (evaluated before each update, final value appended) is
/// written to loglik when provided.
PldaModel plda_train(const std::vector<Embedding> &embeddings, int64_t iterations,
                     std::vector<double> *loglik = nullptr);

/// EM iterations from an explicit starting model.
PldaModel plda_em_iterate(const PldaModel &init,
                          const std::vector<Embedding> &embeddings,
                          int64_t iterations, std::vector<double> *loglik = nullptr);

/// Marginal log likelihood of a set of vectors sharing one latent speaker.
double plda_joint_log_likelihood(const PldaModel &model,
                                 const std::vector<const std::vector<double> *> &xs);

/// Log likelihood ratio of same-speaker vs different-speaker hypotheses.
double plda_score(const PldaModel &model, const Embedding &enrollment,
                  const Embedding &test);

// -- Metrics -------------------------------------------------------------------

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // impostors accepted at or above the threshold
  double frr = 0.0;  // genuines rejected below the threshold
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::vector<RocPoint> roc;  // swept at every distinct score, ascending
};

/// Equal error rate: sweep thresholds at all distinct scores, reduce the ROC
/// to its convex frontier and read the FAR = FRR crossing with linear
/// interpolation between the bracketing operating points.
EerResult eer(const std::vector<double> &genuine,
              const std::vector<double> &impostor);

double closed_set_accuracy(const std::vector<int64_t> &decisions,
                           const std::vector<int64_t> &labels);

/// Embedding file: binary header (count, dim as 64-bit little-endian
/// integers) followed by the rows as 64-bit little-endian floats.  A
/// sidecar "<path>.ids" text file carries one utterance id per row.
void save_embeddings_file(const std::string &path,
                          const std::vector<Embedding> &embeddings);
std::vector<Embedding> load_embeddings_file(const std::string &path);

/// Mean silhouette with cosine distance; singleton clusters contribute 0.
double silhouette_cosine(const std::vector<std::vector<double>> &points,
                         const std::vector<int64_t> &labels);

}  // namespace advasr

#endif  // ADVASR_SPEAKER_EVAL_H_
