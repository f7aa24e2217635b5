// include/simuls2s/ngram/ngram.h

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

#ifndef SIMULS2S_NGRAM_NGRAM_H_
#define SIMULS2S_NGRAM_NGRAM_H_

#include <map>
#include <span>
#include <string>
#include <vector>

namespace simuls2s {

// Back-off n-gram model over token ids 1..V. Id 0 is the end-of-sentence
// symbol </s> and id V + 1 the start symbol <s>, which is never predicted.
// Probabilities come from interpolated absolute discounting and are stored in
// back-off form: an n-gram seen in training carries its full interpolated
// probability, every other query backs off through the history's weight.
class NGramModel {
 public:
  static constexpr int kEndOfSentence = 0;

  struct Entry {
    double log_prob = 0.0;  // natural log
    double log_bow = 0.0;   // natural log; 0 when the n-gram is never a history
  };

  NGramModel() = default;

  // corpus sequences hold ids in [1, vocab_size]. Throws DataError on an empty
  // corpus or an out-of-range id.
  static NGramModel Train(const std::vector<std::vector<int>>& corpus, int vocab_size,
                          int order = 4, double discount = 0.75);

  int order() const { return order_; }
  int vocab_size() const { return vocab_size_; }
  int start_id() const { return vocab_size_ + 1; }

  // ln P(token | history) where `history` is the sequence emitted so far
  // without <s>; only its last order - 1 symbols matter. `token` lies in
  // [0, V].
  double LogProb(int token, std::span<const int> history) const;

  // ln P(token | context) for an explicit context that may start with <s>.
  double LogProbContext(int token, std::span<const int> context) const;

  // Stored entry for an exact n-gram, or nullptr.
  const Entry* Find(std::span<const int> ngram) const;

  // Total ln probability of a sentence including </s>.
  double SentenceLogProb(std::span<const int> sentence) const;

  void SaveArpa(const std::string& path) const;
  static NGramModel LoadArpa(const std::string& path);

  // Number of stored n-grams at each order (index 0 = unigrams).
  std::vector<std::size_t> Counts() const;

 private:
  int order_ = 0;
  int vocab_size_ = 0;
  std::vector<std::map<std::vector<int>, Entry>> tables_;  // tables_[n - 1]
};

}  // namespace simuls2s

#endif  // SIMULS2S_NGRAM_NGRAM_H_
