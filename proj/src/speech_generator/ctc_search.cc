// src/speech_generator/ctc_search.cc

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

#include "simuls2s/speech_generator/ctc_search.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simuls2s/base/error.h"
#include "simuls2s/numerics/ctc.h"
#include "simuls2s/numerics/ops.h"

namespace simuls2s {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double IncrementalCtcSearch::Beam::Total() const { return LogAdd(p_blank, p_nonblank) + lm_score; }

IncrementalCtcSearch::IncrementalCtcSearch(const NGramModel* lm, CtcSearchOptions options)
    : lm_(lm), options_(options) {
  if (options.beam < 1) throw UsageError("CTC beam must be >= 1");
  beams_[{}] = Beam{0.0, kNegInf, 0.0};
}

double IncrementalCtcSearch::LmScore(const std::vector<int>& prefix, int symbol) const {
  if (lm_ == nullptr || options_.lm_weight == 0.0) return 0.0;
  return options_.lm_weight * lm_->LogProb(symbol, prefix);
}

void IncrementalCtcSearch::Step(std::span<const double> lp) {
  const int classes = static_cast<int>(lp.size());
  std::map<std::vector<int>, Beam> next;
  auto slot = [&](const std::vector<int>& prefix, double lm_score) -> Beam& {
    auto it = next.find(prefix);
    if (it == next.end()) it = next.emplace(prefix, Beam{kNegInf, kNegInf, lm_score}).first;
    return it->second;
  };
  for (const auto& [prefix, beam] : beams_) {
    const double total = LogAdd(beam.p_blank, beam.p_nonblank);
    Beam& same = slot(prefix, beam.lm_score);
    same.p_blank = LogAdd(same.p_blank, total + lp[kBlank]);
    const int last = prefix.empty() ? -1 : prefix.back();
    for (int s = 1; s < classes; ++s) {
      if (s == last) {
        same.p_nonblank = LogAdd(same.p_nonblank, beam.p_nonblank + lp[s]);
      }
      const double from = s == last ? beam.p_blank : total;
      if (from == kNegInf) continue;
      std::vector<int> ext = prefix;
      ext.push_back(s);
      auto it = next.find(ext);
      Beam& e = it != next.end() ? it->second : slot(ext, beam.lm_score + LmScore(prefix, s));
      e.p_nonblank = LogAdd(e.p_nonblank, from + lp[s]);
    }
  }

  // Rank individual (prefix, component) pairs and keep the best `beam`.
  struct Component {
    double score;
    const std::vector<int>* prefix;
    bool blank;
  };
  std::vector<Component> comps;
  for (const auto& [prefix, b] : next) {
    if (b.p_blank > kNegInf) comps.push_back({b.p_blank + b.lm_score, &prefix, true});
    if (b.p_nonblank > kNegInf) comps.push_back({b.p_nonblank + b.lm_score, &prefix, false});
  }
  if (static_cast<int>(comps.size()) > options_.beam) {
    std::stable_sort(comps.begin(), comps.end(),
                     [](const Component& a, const Component& b) { return a.score > b.score; });
    std::map<std::vector<int>, Beam> kept;
    for (int i = 0; i < options_.beam; ++i) {
      const Beam& src = next.at(*comps[i].prefix);
      auto it = kept.find(*comps[i].prefix);
      if (it == kept.end()) {
        it = kept.emplace(*comps[i].prefix, Beam{kNegInf, kNegInf, src.lm_score}).first;
      }
      (comps[i].blank ? it->second.p_blank : it->second.p_nonblank) =
          comps[i].blank ? src.p_blank : src.p_nonblank;
    }
    next = std::move(kept);
  } else {
    for (auto it = next.begin(); it != next.end();) {
      it = (it->second.p_blank == kNegInf && it->second.p_nonblank == kNegInf) ? next.erase(it)
                                                                                : std::next(it);
    }
  }
  beams_ = std::move(next);
}

std::pair<std::vector<int>, double> IncrementalCtcSearch::Best() const {
  const std::vector<int>* best = nullptr;
  double best_score = kNegInf;
  for (const auto& [prefix, b] : beams_) {
    const double s = b.Total();
    if (best == nullptr || s > best_score) best = &prefix, best_score = s;
  }
  return {*best, best_score};
}

std::vector<int> IncrementalCtcSearch::ProcessWindow(const Tensor& window, bool prune) {
  Advance(window);
  if (!prune) return {};
  return CommitBest();
}

void IncrementalCtcSearch::Advance(const Tensor& window) {
  if (finished_) throw Error("ProcessWindow after Finish");
  if (window.empty() || window.rows() < 1) throw ShapeError("empty CTC window");
  if (lm_ != nullptr && window.cols() - 1 > lm_->vocab_size()) {
    throw DataError("CTC window has more unit classes than the n-gram vocabulary");
  }
  for (int t = 0; t < window.rows(); ++t) Step(window.row(t));
}

std::vector<int> IncrementalCtcSearch::CommitBest() {
  if (finished_) throw Error("CommitBest after Finish");
  auto [best, score] = Best();
  const Beam keep = beams_.at(best);
  beams_.clear();
  beams_[best] = keep;
  std::vector<int> fresh(best.begin() + committed_.size(), best.end());
  committed_ = best;
  return fresh;
}

std::vector<int> IncrementalCtcSearch::Finish() {
  if (finished_) throw Error("Finish called twice");
  finished_ = true;
  auto [best, score] = Best();
  std::vector<int> fresh(best.begin() + committed_.size(), best.end());
  committed_ = best;
  return fresh;
}

std::vector<int> CtcGreedy::ProcessWindow(const Tensor& window) {
  if (window.empty() || window.rows() < 1) throw ShapeError("empty CTC window");
  std::vector<int> fresh;
  for (int t = 0; t < window.rows(); ++t) {
    auto row = window.row(t);
    const int s = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (s != kBlank && s != prev_) fresh.push_back(s);
    prev_ = s;
  }
  committed_.insert(committed_.end(), fresh.begin(), fresh.end());
  return fresh;
}

}  // namespace simuls2s
