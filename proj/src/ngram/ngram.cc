// src/ngram/ngram.cc

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

#include "simuls2s/ngram/ngram.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace {

constexpr double kLn10 = 2.302585092994045684;
constexpr double kArpaMissing = -99.0;

struct HistoryStats {
  double total = 0.0;    // c(h) = sum_w c(hw)
  double distinct = 0.0; // N1+(h .)
};

class Estimator {
 public:
  Estimator(int order, int vocab, double discount)
      : order_(order), vocab_(vocab), d_(discount), counts_(order), hist_(order) {}

  void Add(const std::vector<int>& seq) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (int n = 1; n <= order_ && n <= static_cast<int>(i) + 1; ++n) {
        std::vector<int> g(seq.begin() + (i + 1 - n), seq.begin() + i + 1);
        double& c = counts_[n - 1][g];
        if (c == 0.0) hist_[n - 1][std::vector<int>(g.begin(), g.end() - 1)].distinct += 1.0;
        c += 1.0;
        hist_[n - 1][std::vector<int>(g.begin(), g.end() - 1)].total += 1.0;
      }
    }
  }

  // Interpolated probability of w after `context` (length < order).
  double Prob(int w, const std::vector<int>& context) const {
    const int n = static_cast<int>(context.size()) + 1;
    if (n == 1) {
      const HistoryStats& s = hist_[0].at({});
      const double c = Count(1, {w});
      return std::max(c - d_, 0.0) / s.total + d_ * s.distinct / s.total / (vocab_ + 1);
    }
    const std::vector<int> shorter(context.begin() + 1, context.end());
    const double lower = Prob(w, shorter);
    auto it = hist_[n - 1].find(context);
    if (it == hist_[n - 1].end()) return lower;
    std::vector<int> g = context;
    g.push_back(w);
    const double c = Count(n, g);
    return (std::max(c - d_, 0.0) + d_ * it->second.distinct * lower) / it->second.total;
  }

  double Count(int n, const std::vector<int>& g) const {
    auto it = counts_[n - 1].find(g);
    return it == counts_[n - 1].end() ? 0.0 : it->second;
  }

  const std::map<std::vector<int>, double>& counts(int n) const { return counts_[n - 1]; }

  // Back-off weight of history h (length n - 1 for order n), or 0 if unseen.
  double Bow(const std::vector<int>& h) const {
    const int n = static_cast<int>(h.size()) + 1;
    if (n > order_) return 0.0;
    auto it = hist_[n - 1].find(h);
    if (it == hist_[n - 1].end()) return 0.0;
    return d_ * it->second.distinct / it->second.total;
  }

 private:
  int order_;
  int vocab_;
  double d_;
  std::vector<std::map<std::vector<int>, double>> counts_;
  std::vector<std::map<std::vector<int>, HistoryStats>> hist_;
};

std::string WordOf(int id, int vocab) {
  if (id == NGramModel::kEndOfSentence) return "</s>";
  if (id == vocab + 1) return "<s>";
  return std::to_string(id);
}

}  // namespace

NGramModel NGramModel::Train(const std::vector<std::vector<int>>& corpus, int vocab_size,
                             int order, double discount) {
  if (corpus.empty()) throw DataError("cannot train an n-gram model on an empty corpus");
  if (order < 1) throw UsageError("n-gram order must be >= 1");
  if (vocab_size < 0) throw UsageError("negative n-gram vocabulary");
  if (!(discount > 0.0 && discount < 1.0)) throw UsageError("discount must lie in (0, 1)");
  Estimator est(order, vocab_size, discount);
  for (const auto& sentence : corpus) {
    std::vector<int> seq{vocab_size + 1};
    for (int id : sentence) {
      if (id < 1 || id > vocab_size) {
        throw DataError("n-gram training token " + std::to_string(id) + " outside [1, " +
                        std::to_string(vocab_size) + "]");
      }
      seq.push_back(id);
    }
    seq.push_back(kEndOfSentence);
    est.Add(seq);
  }

  NGramModel m;
  m.order_ = order;
  m.vocab_size_ = vocab_size;
  m.tables_.resize(order);
  for (int w = 0; w <= vocab_size; ++w) {
    Entry e;
    e.log_prob = std::log(est.Prob(w, {}));
    const double bow = est.Bow({w});
    if (bow > 0.0) e.log_bow = std::log(bow);
    m.tables_[0][{w}] = e;
  }
  Entry start;
  start.log_prob = kArpaMissing * kLn10;
  if (const double bow = est.Bow({vocab_size + 1}); bow > 0.0) start.log_bow = std::log(bow);
  m.tables_[0][{vocab_size + 1}] = start;
  for (int n = 2; n <= order; ++n) {
    for (const auto& [g, c] : est.counts(n)) {
      Entry e;
      e.log_prob = std::log(est.Prob(g.back(), std::vector<int>(g.begin(), g.end() - 1)));
      const double bow = est.Bow(g);
      if (bow > 0.0) e.log_bow = std::log(bow);
      m.tables_[n - 1][g] = e;
    }
  }
  return m;
}

const NGramModel::Entry* NGramModel::Find(std::span<const int> ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return nullptr;
  const auto& table = tables_[ngram.size() - 1];
  auto it = table.find(std::vector<int>(ngram.begin(), ngram.end()));
  return it == table.end() ? nullptr : &it->second;
}

double NGramModel::LogProbContext(int token, std::span<const int> context) const {
  if (order_ == 0) throw Error("query on an untrained n-gram model");
  if (token < 0 || token > vocab_size_) {
    throw DataError("n-gram query token " + std::to_string(token) + " outside the vocabulary");
  }
  if (static_cast<int>(context.size()) > order_ - 1) context = context.last(order_ - 1);
  double back = 0.0;
  while (true) {
    std::vector<int> g(context.begin(), context.end());
    g.push_back(token);
    if (const Entry* e = Find(g)) return back + e->log_prob;
    if (context.empty()) throw DataError("n-gram model lacks a unigram entry");
    if (const Entry* h = Find(context)) back += h->log_bow;
    context = context.subspan(1);
  }
}

double NGramModel::LogProb(int token, std::span<const int> history) const {
  std::vector<int> ctx;
  const std::size_t keep = order_ > 0 ? static_cast<std::size_t>(order_ - 1) : 0;
  if (history.size() < keep) ctx.push_back(start_id());
  const std::size_t from = history.size() > keep ? history.size() - keep : 0;
  ctx.insert(ctx.end(), history.begin() + from, history.end());
  return LogProbContext(token, ctx);
}

double NGramModel::SentenceLogProb(std::span<const int> sentence) const {
  double total = 0.0;
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    const int token = i < sentence.size() ? sentence[i] : kEndOfSentence;
    total += LogProb(token, sentence.first(i));
  }
  return total;
}

std::vector<std::size_t> NGramModel::Counts() const {
  std::vector<std::size_t> out;
  for (const auto& t : tables_) out.push_back(t.size());
  return out;
}

void NGramModel::SaveArpa(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  os << "\\data\\\n";
  for (int n = 1; n <= order_; ++n) os << "ngram " << n << "=" << tables_[n - 1].size() << "\n";
  char buf[64];
  for (int n = 1; n <= order_; ++n) {
    os << "\n\\" << n << "-grams:\n";
    for (const auto& [g, e] : tables_[n - 1]) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.log_prob / kLn10);
      os << buf << "\t";
      for (std::size_t i = 0; i < g.size(); ++i) os << (i ? " " : "") << WordOf(g[i], vocab_size_);
      if (e.log_bow != 0.0) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.log_bow / kLn10);
        os << "\t" << buf;
      }
      os << "\n";
    }
  }
  os << "\n\\end\\\n";
  if (!os) throw DataError("write failed for " + path);
}

NGramModel NGramModel::LoadArpa(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::string line;
  std::vector<std::size_t> declared;
  std::vector<std::vector<std::pair<std::vector<std::string>, Entry>>> raw;
  int section = -1;
  bool saw_data = false, saw_end = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "\\data\\") {
      saw_data = true;
      continue;
    }
    if (line == "\\end\\") {
      saw_end = true;
      break;
    }
    if (line.rfind("ngram ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("malformed ARPA header line: " + line);
      const int n = std::stoi(line.substr(6, eq - 6));
      if (n != static_cast<int>(declared.size()) + 1) throw DataError("ARPA orders out of sequence");
      declared.push_back(std::stoull(line.substr(eq + 1)));
      continue;
    }
    if (line[0] == '\\') {
      const int n = std::stoi(line.substr(1));
      if (n < 1 || n > static_cast<int>(declared.size())) throw DataError("bad ARPA section " + line);
      section = n - 1;
      raw.resize(declared.size());
      continue;
    }
    if (section < 0) throw DataError("ARPA entry outside a section");
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 2 || fields.size() > 3) throw DataError("malformed ARPA entry: " + line);
    Entry e;
    e.log_prob = std::stod(fields[0]) * kLn10;
    if (fields.size() == 3) e.log_bow = std::stod(fields[2]) * kLn10;
    std::vector<std::string> words;
    std::stringstream ws(fields[1]);
    for (std::string w; ws >> w;) words.push_back(w);
    if (static_cast<int>(words.size()) != section + 1) throw DataError("ARPA entry has wrong order");
    raw[section].emplace_back(std::move(words), e);
  }
  if (!saw_data || !saw_end || declared.empty()) throw DataError("incomplete ARPA file " + path);
  int vocab = 0;
  for (const auto& [words, e] : raw[0]) {
    if (words[0] != "<s>" && words[0] != "</s>") vocab = std::max(vocab, std::stoi(words[0]));
  }
  NGramModel m;
  m.order_ = static_cast<int>(declared.size());
  m.vocab_size_ = vocab;
  m.tables_.resize(m.order_);
  for (int n = 0; n < m.order_; ++n) {
    if (raw[n].size() != declared[n]) {
      throw DataError("ARPA header declares " + std::to_string(declared[n]) + " " +
                      std::to_string(n + 1) + "-grams, body has " + std::to_string(raw[n].size()));
    }
    for (const auto& [words, e] : raw[n]) {
      std::vector<int> g;
      for (const auto& w : words) {
        g.push_back(w == "</s>" ? kEndOfSentence : w == "<s>" ? vocab + 1 : std::stoi(w));
      }
      m.tables_[n][g] = e;
    }
  }
  return m;
}

}  // namespace simuls2s
