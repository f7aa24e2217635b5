// tests/test_util.h

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

#ifndef SIMULS2S_TESTS_TEST_UTIL_H_
#define SIMULS2S_TESTS_TEST_UTIL_H_

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "simuls2s/numerics/autograd.h"
#include "simuls2s/numerics/tensor.h"

namespace simuls2s::testing {

using LossFn = std::function<Var(std::vector<Var>&)>;

inline Tensor RandomMatrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> d(static_cast<std::size_t>(rows) * cols);
  for (double& v : d) v = dist(rng);
  return Tensor::Matrix(rows, cols, std::move(d));
}

// Relative error ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-12)
// between tape gradients and central differences with step eps.
inline double GradCheck(const std::vector<Tensor>& inputs, const LossFn& loss_fn,
                        double eps = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.Leaf(t));
  Var loss = loss_fn(vars);
  tape.Backward(loss);
  double diff2 = 0.0, norm_a = 0.0, norm_n = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor analytic = tape.Grad(vars[i]);
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<double> d = inputs[i].ToVector();
        d[k] += delta;
        std::vector<Var> vs;
        for (std::size_t j = 0; j < inputs.size(); ++j)
          vs.push_back(Var(j == i ? Tensor(inputs[i].shape(), d) : inputs[j]));
        return loss_fn(vs).value().item();
      };
      const double numeric = (eval(eps) - eval(-eps)) / (2 * eps);
      diff2 += (analytic[k] - numeric) * (analytic[k] - numeric);
      norm_a += analytic[k] * analytic[k];
      norm_n += numeric * numeric;
    }
  }
  return std::sqrt(diff2) / std::max(std::sqrt(norm_a) + std::sqrt(norm_n), 1e-12);
}

}  // namespace simuls2s::testing

#endif  // SIMULS2S_TESTS_TEST_UTIL_H_
