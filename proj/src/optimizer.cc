// src/optimizer.cc

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

#include "advasr/optimizer.h"

#include <cmath>

namespace advasr {

void AdamOptimizer::step(const std::vector<Param *> &params) {
  double sq_norm = 0.0;
  for (const Param *p : params) {
    for (int64_t i = 0; i < p->grad.numel(); ++i) {
      double g = p->grad[i];
      if (!std::isfinite(g))
        throw NumericError("optimizer: non-finite gradient in parameter '" +
                           p->name + "'");
      sq_norm += g * g;
    }
  }
  double norm = std::sqrt(sq_norm);
  double scale = (norm > cfg_.clip_norm && norm > 0.0) ? cfg_.clip_norm / norm : 1.0;

  for (Param *p : params) {
    Moments &mom = state_[p];
    if (mom.m.numel() == 0) {
      mom.m = Tensor(p->value.shape());
      mom.v = Tensor(p->value.shape());
    }
    mom.t += 1;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(mom.t));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(mom.t));
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      double g = p->grad[i] * scale;
      mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * g;
      mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * g * g;
      double m_hat = mom.m[i] / bc1;
      double v_hat = mom.v[i] / bc2;
      p->value[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
    p->zero_grad();
  }
}

}  // namespace advasr
