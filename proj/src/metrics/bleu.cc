// src/metrics/bleu.cc

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

#include "simuls2s/metrics/bleu.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace {

std::map<std::vector<int>, int> NgramCounts(const std::vector<int>& seq, int n) {
  std::map<std::vector<int>, int> counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[std::vector<int>(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

}  // namespace

BleuStats CollectBleuStats(const std::vector<std::vector<int>>& hyps,
                           const std::vector<std::vector<int>>& refs, int max_order) {
  if (hyps.size() != refs.size()) throw DataError("BLEU needs one reference per hypothesis");
  if (max_order < 1) throw UsageError("BLEU max_order must be >= 1");
  BleuStats s;
  s.matches.assign(max_order, 0.0);
  s.totals.assign(max_order, 0.0);
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    s.hyp_len += static_cast<double>(hyps[k].size());
    s.ref_len += static_cast<double>(refs[k].size());
    for (int n = 1; n <= max_order; ++n) {
      const auto h = NgramCounts(hyps[k], n);
      const auto r = NgramCounts(refs[k], n);
      for (const auto& [g, c] : h) {
        s.totals[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) s.matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  return s;
}

double CorpusBleu(const std::vector<std::vector<int>>& hyps,
                  const std::vector<std::vector<int>>& refs, int max_order) {
  const BleuStats s = CollectBleuStats(hyps, refs, max_order);
  if (s.hyp_len == 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_order; ++n) {
    if (s.totals[n] == 0.0) continue;
    const double p = s.matches[n] > 0.0 ? s.matches[n] / s.totals[n] : kBleuZeroPrecision;
    log_sum += std::log(p);
    ++orders;
  }
  const double bp = s.hyp_len < s.ref_len ? std::exp(1.0 - s.ref_len / s.hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

double CorpusBleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                  int max_order) {
  std::unordered_map<std::string, int> vocab;
  auto encode = [&](const std::string& line) {
    std::vector<int> ids;
    std::istringstream is(line);
    for (std::string w; is >> w;) ids.push_back(vocab.emplace(w, vocab.size()).first->second);
    return ids;
  };
  std::vector<std::vector<int>> h, r;
  for (const auto& s : hyps) h.push_back(encode(s));
  for (const auto& s : refs) r.push_back(encode(s));
  return CorpusBleu(h, r, max_order);
}

}  // namespace simuls2s
