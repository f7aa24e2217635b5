// tests/search_oracle.h

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

#ifndef SIMULS2S_TESTS_SEARCH_ORACLE_H_
#define SIMULS2S_TESTS_SEARCH_ORACLE_H_

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "oracles.h"
#include "simuls2s/ngram/ngram.h"
#include "simuls2s/numerics/ops.h"
#include "test_util.h"

namespace simuls2s::testing {

// Log-softmax rows; `sharp` scales logits so some instances are peaked.
inline Tensor RandomWindow(int u, int classes, std::mt19937_64& rng, double sharp) {
  Tensor logits = RandomMatrix(u, classes, rng, sharp);
  return LogSoftmax(Var(logits)).value();
}

// Exhaustive reference for window-by-window search: the committed prefix after
// window j is the best collapsed output over paths whose first i windows
// collapse to the prefix committed after window i, for every i < j. Returns
// (prefix, score) per window.
inline std::vector<std::pair<std::vector<int>, double>> ExhaustiveWindowSearch(
    const std::vector<Tensor>& windows, const NGramModel* lm, double w) {
  std::vector<std::pair<std::vector<int>, double>> out;
  std::vector<std::vector<int>> committed;
  const int classes = windows[0].cols();
  std::vector<int> bounds;
  int frames = 0;
  for (const Tensor& win : windows) bounds.push_back(frames += win.rows());
  for (std::size_t j = 0; j < windows.size(); ++j) {
    std::map<std::vector<int>, double> mass;
    std::vector<int> path;
    std::function<void(int, double)> dfs = [&](int t, double lp) {
      for (std::size_t i = 0; i < j; ++i) {
        if (t == bounds[i] && CollapsePath(path) != committed[i]) return;
      }
      if (t == bounds[j]) {
        auto [it, fresh] = mass.emplace(CollapsePath(path), lp);
        if (!fresh) it->second = LogAdd(it->second, lp);
        return;
      }
      std::size_t win = 0;
      while (t >= bounds[win]) ++win;
      const int local = t - (win ? bounds[win - 1] : 0);
      for (int c = 0; c < classes; ++c) {
        path.push_back(c);
        dfs(t + 1, lp + windows[win].at(local, c));
        path.pop_back();
      }
    };
    dfs(0, 0.0);
    std::vector<int> best;
    double best_score = -INFINITY;
    for (const auto& [seq, m] : mass) {
      double score = m;
      if (lm != nullptr && w != 0.0) {
        for (std::size_t i = 0; i < seq.size(); ++i)
          score += w * lm->LogProb(seq[i], std::span<const int>(seq).first(i));
      }
      if (score > best_score) best_score = score, best = seq;
    }
    out.emplace_back(best, best_score);
    committed.push_back(best);
  }
  return out;
}

}  // namespace simuls2s::testing

#endif  // SIMULS2S_TESTS_SEARCH_ORACLE_H_
