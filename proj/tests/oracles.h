// tests/oracles.h

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

#ifndef SIMULS2S_TESTS_ORACLES_H_
#define SIMULS2S_TESTS_ORACLES_H_

// Brute-force reference computations. Nothing here shares code with the
// implementations under test beyond the Tensor container.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "simuls2s/numerics/tensor.h"

namespace simuls2s::testing {

inline std::vector<int> CollapsePath(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != 0 && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

// Visits every frame-level path over `classes` symbols of length `frames`.
inline void ForEachPath(int frames, int classes,
                        const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> path(frames, 0);
  while (true) {
    visit(path);
    int i = frames - 1;
    while (i >= 0 && ++path[i] == classes) path[i--] = 0;
    if (i < 0) break;
  }
}

// log sum over all paths collapsing to target of prod exp(log_probs[t, path_t]).
inline double BruteForceCtcLogLikelihood(const Tensor& log_probs, const std::vector<int>& target) {
  double total = 0.0;
  ForEachPath(log_probs.rows(), log_probs.cols(), [&](const std::vector<int>& path) {
    if (CollapsePath(path) != target) return;
    double lp = 0.0;
    for (int t = 0; t < log_probs.rows(); ++t) lp += log_probs.at(t, path[t]);
    total += std::exp(lp);
  });
  return total > 0 ? std::log(total) : -std::numeric_limits<double>::infinity();
}

// All label sequences over [1, vocab] of length <= max_len.
inline std::vector<std::vector<int>> AllSequences(int vocab, int max_len) {
  std::vector<std::vector<int>> out{{}};
  std::vector<std::vector<int>> frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& s : frontier)
      for (int v = 1; v <= vocab; ++v) {
        auto e = s;
        e.push_back(v);
        next.push_back(e);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace simuls2s::testing

#endif  // SIMULS2S_TESTS_ORACLES_H_
