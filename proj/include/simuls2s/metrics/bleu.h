// include/simuls2s/metrics/bleu.h

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

#ifndef SIMULS2S_METRICS_BLEU_H_
#define SIMULS2S_METRICS_BLEU_H_

#include <string>
#include <vector>

namespace simuls2s {

inline constexpr double kBleuZeroPrecision = 1e-9;

struct BleuStats {
  std::vector<double> matches;  // clipped n-gram matches per order
  std::vector<double> totals;   // hypothesis n-grams per order
  double hyp_len = 0.0;
  double ref_len = 0.0;
};

// Corpus BLEU in [0, 100] over token-id sequences: geometric mean of modified
// n-gram precisions times the brevity penalty. Orders for which the
// hypotheses contain no n-grams at all are left out of the mean; a zero
// precision is replaced by 1e-9. An empty hypothesis corpus scores 0.
double CorpusBleu(const std::vector<std::vector<int>>& hyps,
                  const std::vector<std::vector<int>>& refs, int max_order = 4);

// Same over whitespace-tokenized strings.
double CorpusBleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                  int max_order = 4);

BleuStats CollectBleuStats(const std::vector<std::vector<int>>& hyps,
                           const std::vector<std::vector<int>>& refs, int max_order);

}  // namespace simuls2s

#endif  // SIMULS2S_METRICS_BLEU_H_
