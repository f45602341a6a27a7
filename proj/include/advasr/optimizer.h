// include/advasr/optimizer.h

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

#ifndef ADVASR_OPTIMIZER_H_
#define ADVASR_OPTIMIZER_H_

#include <unordered_map>
#include <vector>

#include "advasr/layers.h"

namespace advasr {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global gradient norm over the updated subset
};

/// Adaptive-moment updates with global-norm gradient clipping.  Moments are
/// keyed by parameter identity, so distinct parameter groups can be stepped
/// independently.  step() consumes and zeroes the accumulated gradients.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const AdamConfig &config) : cfg_(config) {}

  void step(const std::vector<Param *> &params);

  const AdamConfig &config() const { return cfg_; }

 private:
  struct Moments {
    Tensor m, v;
    int64_t t = 0;
  };
  AdamConfig cfg_;
  std::unordered_map<const Param *, Moments> state_;
};

}  // namespace advasr

#endif  // ADVASR_OPTIMIZER_H_
