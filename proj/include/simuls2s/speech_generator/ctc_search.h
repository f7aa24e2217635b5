// include/simuls2s/speech_generator/ctc_search.h

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

#ifndef SIMULS2S_SPEECH_GENERATOR_CTC_SEARCH_H_
#define SIMULS2S_SPEECH_GENERATOR_CTC_SEARCH_H_

#include <map>
#include <vector>

#include "simuls2s/ngram/ngram.h"
#include "simuls2s/numerics/tensor.h"

namespace simuls2s {

struct CtcSearchOptions {
  int beam = 10;
  double lm_weight = 0.5;
};

// Prefix beam search run window by window over a stream of CTC log-prob
// windows [U x (V_s + 1)]. Within a window the search keeps the `beam` best
// (prefix, blank / non-blank) components by score; at the end of a pruned
// window only the best prefix survives and its new tokens are committed.
// When an n-gram model is given, appending symbol s to a prefix adds
// lm_weight * ln P(s | prefix).
class IncrementalCtcSearch {
 public:
  struct Beam {
    double p_blank;
    double p_nonblank;
    double lm_score;
    double Total() const;
  };

  IncrementalCtcSearch(const NGramModel* lm, CtcSearchOptions options);

  // Processes one window. With `prune` set the beam collapses to its best
  // prefix and the newly committed tokens are returned; otherwise nothing is
  // committed.
  std::vector<int> ProcessWindow(const Tensor& window, bool prune);

  // The two halves of ProcessWindow.
  void Advance(const Tensor& window);
  std::vector<int> CommitBest();

  // Commits the best prefix and returns its uncommitted tail. No further
  // windows are accepted.
  std::vector<int> Finish();

  const std::vector<int>& committed() const { return committed_; }
  const std::map<std::vector<int>, Beam>& beams() const { return beams_; }
  // Best prefix and its total score (acoustic + fused LM).
  std::pair<std::vector<int>, double> Best() const;

 private:
  void Step(std::span<const double> frame);
  double LmScore(const std::vector<int>& prefix, int symbol) const;

  const NGramModel* lm_;
  CtcSearchOptions options_;
  std::map<std::vector<int>, Beam> beams_;
  std::vector<int> committed_;
  bool finished_ = false;
};

// Frame-wise argmax with repeats collapsed and blanks dropped. The last
// frame symbol (blank included) carries over to the next window.
class CtcGreedy {
 public:
  std::vector<int> ProcessWindow(const Tensor& window);
  const std::vector<int>& committed() const { return committed_; }
  int prev_last_symbol() const { return prev_; }

 private:
  int prev_ = 0;
  std::vector<int> committed_;
};

}  // namespace simuls2s

#endif  // SIMULS2S_SPEECH_GENERATOR_CTC_SEARCH_H_
