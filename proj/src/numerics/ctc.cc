// src/numerics/ctc.cc

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

#include "simuls2s/numerics/ctc.h"

#include <cmath>
#include <limits>
#include <vector>

#include "simuls2s/base/error.h"
#include "simuls2s/numerics/ops.h"

namespace simuls2s {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Lattice {
  int frames = 0;
  int states = 0;
  std::vector<int> labels;      // extended label sequence: blank, l1, blank, ...
  std::vector<double> alpha;    // [frames x states], emission at t included
  std::vector<double> beta;     // [frames x states], emission at t included
  double log_likelihood = kNegInf;
};

std::vector<int> Extend(std::span<const int> target) {
  std::vector<int> ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(kBlank);
  for (int id : target) {
    ext.push_back(id);
    ext.push_back(kBlank);
  }
  return ext;
}

void CheckTarget(const Tensor& lp, std::span<const int> target) {
  const int classes = lp.cols();
  for (int id : target) {
    if (id <= kBlank || id >= classes) {
      throw ShapeError("CTC target id " + std::to_string(id) + " outside [1, " +
                       std::to_string(classes - 1) + "]");
    }
  }
}

// Skip transition s-2 -> s is allowed for non-blank labels that differ from
// the label two states back.
bool CanSkip(const std::vector<int>& ext, int s) {
  return s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2];
}

Lattice Run(const Tensor& lp, std::span<const int> target, bool with_beta) {
  CheckTarget(lp, target);
  Lattice lat;
  lat.frames = lp.rows();
  lat.labels = Extend(target);
  lat.states = static_cast<int>(lat.labels.size());
  const int T = lat.frames, S = lat.states;
  if (T == 0) return lat;
  auto at = [S](int t, int s) { return static_cast<std::size_t>(t) * S + s; };

  lat.alpha.assign(static_cast<std::size_t>(T) * S, kNegInf);
  lat.alpha[at(0, 0)] = lp.at(0, lat.labels[0]);
  if (S > 1) lat.alpha[at(0, 1)] = lp.at(0, lat.labels[1]);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double a = lat.alpha[at(t - 1, s)];
      if (s >= 1) a = LogAdd(a, lat.alpha[at(t - 1, s - 1)]);
      if (CanSkip(lat.labels, s)) a = LogAdd(a, lat.alpha[at(t - 1, s - 2)]);
      if (a != kNegInf) lat.alpha[at(t, s)] = a + lp.at(t, lat.labels[s]);
    }
  }
  lat.log_likelihood = lat.alpha[at(T - 1, S - 1)];
  if (S > 1) lat.log_likelihood = LogAdd(lat.log_likelihood, lat.alpha[at(T - 1, S - 2)]);

  if (with_beta) {
    lat.beta.assign(static_cast<std::size_t>(T) * S, kNegInf);
    lat.beta[at(T - 1, S - 1)] = lp.at(T - 1, lat.labels[S - 1]);
    if (S > 1) lat.beta[at(T - 1, S - 2)] = lp.at(T - 1, lat.labels[S - 2]);
    for (int t = T - 2; t >= 0; --t) {
      for (int s = 0; s < S; ++s) {
        double b = lat.beta[at(t + 1, s)];
        if (s + 1 < S) b = LogAdd(b, lat.beta[at(t + 1, s + 1)]);
        if (s + 2 < S && CanSkip(lat.labels, s + 2)) b = LogAdd(b, lat.beta[at(t + 1, s + 2)]);
        if (b != kNegInf) lat.beta[at(t, s)] = b + lp.at(t, lat.labels[s]);
      }
    }
  }
  return lat;
}

}  // namespace

int CtcMinFrames(std::span<const int> target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

double CtcLogLikelihood(const Tensor& log_probs, std::span<const int> target) {
  return Run(log_probs, target, false).log_likelihood;
}

Var CtcLoss(const Var& log_probs, std::span<const int> target) {
  const Tensor& lp = log_probs.value();
  Lattice lat = Run(lp, target, log_probs.tracked());
  if (!std::isfinite(lat.log_likelihood)) {
    throw NumericError("CTC target of length " + std::to_string(target.size()) +
                       " is unreachable in " + std::to_string(lp.rows()) + " frames");
  }
  Tensor loss = Tensor::Scalar(-lat.log_likelihood);
  if (!log_probs.tracked()) return Var(loss);
  const int node = log_probs.node();
  const int T = lat.frames, S = lat.states, C = lp.cols();
  return log_probs.tape()->Record(loss, [=, lat = std::move(lat)](std::span<const double> g,
                                                                   Tape& tape) {
    auto& d = tape.GradOf(node);
    std::vector<double> acc(static_cast<std::size_t>(C));
    for (int t = 0; t < T; ++t) {
      std::fill(acc.begin(), acc.end(), kNegInf);
      for (int s = 0; s < S; ++s) {
        const std::size_t k = static_cast<std::size_t>(t) * S + s;
        if (lat.alpha[k] == kNegInf || lat.beta[k] == kNegInf) continue;
        acc[lat.labels[s]] = LogAdd(acc[lat.labels[s]], lat.alpha[k] + lat.beta[k]);
      }
      for (int c = 0; c < C; ++c) {
        if (acc[c] == kNegInf) continue;
        const double occupancy = std::exp(acc[c] - lp.at(t, c) - lat.log_likelihood);
        d[static_cast<std::size_t>(t) * C + c] -= g[0] * occupancy;
      }
    }
  });
}

}  // namespace simuls2s
