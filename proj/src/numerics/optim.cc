// src/numerics/optim.cc

// Copyright 2026  The simuls2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simuls2s/numerics/optim.h"

#include <cmath>

#include "simuls2s/base/error.h"

namespace simuls2s {

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
    if (p->grad.size() != p->value.size()) p->ZeroGrad();
  }
}

double GlobalGradNorm(const std::vector<Parameter*>& params) {
  double s = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad) s += g * g;
  return std::sqrt(s);
}

void Adam::Step() {
  ++step_;
  double clip = 1.0;
  if (options_.clip_norm > 0) {
    const double norm = GlobalGradNorm(params_);
    if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
    if (norm > options_.clip_norm) clip = options_.clip_norm / norm;
  }
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter* p = params_[i];
    if (p->frozen) {
      p->ZeroGrad();
      continue;
    }
    std::vector<double> w = p->value.ToVector();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = p->grad[k] * clip;
      m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * g;
      v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
    p->value = Tensor(p->value.shape(), std::move(w));
    p->ZeroGrad();
  }
}

}  // namespace simuls2s
