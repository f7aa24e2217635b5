// src/decoder_lm/beam_search.cc

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

#include "simuls2s/decoder_lm/beam_search.h"

#include <algorithm>
#include <limits>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace {

struct Candidate {
  double score;
  int parent;  // index into the current beam
  int token;   // -1 keeps a finished parent unchanged
};

}  // namespace

Hypothesis BeamSearch(DecoderLm& lm, const KvCache& cache, int max_steps, int beam) {
  if (beam < 1) throw UsageError("beam size must be >= 1");
  if (max_steps < 0) throw UsageError("negative generation budget");
  if (!cache.postfix_written) throw Error("BeamSearch before any prompt was inserted");
  std::vector<Hypothesis> hyps(1);
  hyps[0].cache = cache;

  for (int step = 0; step < max_steps; ++step) {
    double best_finished = -std::numeric_limits<double>::infinity();
    double best_active = -std::numeric_limits<double>::infinity();
    for (const auto& h : hyps) {
      double& best = h.finished ? best_finished : best_active;
      best = std::max(best, h.score);
    }
    // Scores only decrease with length, so no active hypothesis can overtake
    // a finished one that already scores at least as high.
    if (best_finished >= best_active) break;

    std::vector<Candidate> cands;
    for (int p = 0; p < static_cast<int>(hyps.size()); ++p) {
      const Hypothesis& h = hyps[p];
      if (h.finished) {
        cands.push_back({h.score, p, -1});
        continue;
      }
      const std::vector<double>& lp = h.cache.last_step.log_probs;
      std::vector<int> order(lp.size());
      for (int v = 0; v < static_cast<int>(lp.size()); ++v) order[v] = v;
      const int width = std::min<int>(beam, static_cast<int>(lp.size()));
      std::partial_sort(order.begin(), order.begin() + width, order.end(),
                        [&](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
      for (int i = 0; i < width; ++i) cands.push_back({h.score + lp[order[i]], p, order[i]});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    if (static_cast<int>(cands.size()) > beam) cands.resize(beam);

    std::vector<Hypothesis> next;
    next.reserve(cands.size());
    for (const Candidate& c : cands) {
      Hypothesis h = hyps[c.parent];
      if (c.token >= 0) {
        h.score = c.score;
        if (c.token == kEosId) {
          h.finished = true;
        } else {
          h.tokens.push_back(c.token);
          h.hidden_stacks.push_back(lm.AppendToken(&h.cache, c.token).hidden_stack);
        }
      }
      next.push_back(std::move(h));
    }
    hyps = std::move(next);
  }

  auto best = std::max_element(hyps.begin(), hyps.end(), [](const auto& a, const auto& b) {
    return a.score < b.score;
  });
  return std::move(*best);
}

Hypothesis GenerateConstrained(DecoderLm& lm, const KvCache& cache, int l_gen, int beam) {
  if (l_gen < 1) throw UsageError("GenerateConstrained requires l_gen >= 1");
  return BeamSearch(lm, cache, l_gen, beam);
}

Hypothesis TailGenerate(DecoderLm& lm, const KvCache& cache, int l_max, int beam) {
  return BeamSearch(lm, cache, l_max, beam);
}

}  // namespace simuls2s
