// tests/decoder_lm_test.cc

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

#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "simuls2s/base/error.h"
#include "simuls2s/decoder_lm/beam_search.h"
#include "simuls2s/decoder_lm/decoder_lm.h"
#include "test_util.h"

namespace simuls2s {
namespace {

using testing::GradCheck;
using testing::RandomMatrix;

LmConfig SmallLm(int vocab = 7) {
  LmConfig c;
  c.vocab_size = vocab;
  c.d_model = 8;
  c.n_layers = 3;
  c.n_heads = 2;
  c.d_ff = 16;
  c.max_positions = 64;
  return c;
}

Parameter* FindParam(DecoderLm& lm, const std::string& name) {
  std::vector<Parameter*> params;
  lm.Collect(&params);
  for (Parameter* p : params)
    if (p->name == name) return p;
  return nullptr;
}

void SetHeadBias(DecoderLm& lm, int id, double value) {
  Parameter* b = FindParam(lm, "lm.head.bias");
  std::vector<double> d = b->value.ToVector();
  d[id] = value;
  b->value = Tensor(b->value.shape(), d);
}

// Next-token log-probs and last-row hidden stack from one causal pass over
// the cache's full layout.
LmStep Scratch(DecoderLm& lm, const KvCache& cache) {
  LmForward f = lm.Forward(Var(lm.LayoutRows(cache)), nullptr);
  const int n = f.logits->rows();
  LmStep s;
  s.log_probs = LogSoftmax(SliceRows(f.logits, n - 1, n))->ToVector();
  std::vector<double> stack;
  for (const Var& h : f.hiddens) {
    auto r = h->row(n - 1);
    stack.insert(stack.end(), r.begin(), r.end());
  }
  s.hidden_stack = Tensor::Matrix(static_cast<int>(f.hiddens.size()), f.hiddens[0]->cols(), stack);
  return s;
}

double MaxDiff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

const std::vector<int> kPrefix{2, 3};
const std::vector<int> kPostfix{4, kBosId};

TEST(DecoderLmTest, BosOnlyGivesDistribution) {
  Rng rng(1);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin({}, std::vector<int>{kBosId});
  LmStep s = lm.ExtendPrompt(&cache, Tensor());
  ASSERT_EQ(s.log_probs.size(), 7u);
  double total = 0;
  for (double v : s.log_probs) total += std::exp(v);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(s.hidden_stack.rows(), 3);
}

TEST(DecoderLmTest, StepsMatchBatchForward) {
  Rng rng(2);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(2, 8, rng));
  for (int tok : {5, 6}) {
    LmStep s = lm.AppendToken(&cache, tok);
    LmStep ref = Scratch(lm, cache);
    EXPECT_LT(MaxDiff(s.log_probs, ref.log_probs), 1e-9);
    EXPECT_LT(MaxAbsDiff(s.hidden_stack, ref.hidden_stack), 1e-9);
  }
}

TEST(DecoderLmTest, Deterministic) {
  Rng a(3), b(3);
  DecoderLm lm1(SmallLm(), a), lm2(SmallLm(), b);
  KvCache c1 = lm1.Begin(kPrefix, kPostfix), c2 = lm2.Begin(kPrefix, kPostfix);
  Rng p(4);
  Tensor prompts = RandomMatrix(3, 8, p);
  EXPECT_EQ(lm1.ExtendPrompt(&c1, prompts).log_probs, lm2.ExtendPrompt(&c2, prompts).log_probs);
}

TEST(DecoderLmTest, EmptyInsertionLeavesCacheUnchanged) {
  Rng rng(5);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(2, 8, rng));
  lm.AppendToken(&cache, 5);
  const int len = cache.length();
  const std::vector<double> before = cache.last_step.log_probs;
  const Tensor keys = cache.layers[0].keys;
  LmStep s = lm.ExtendPrompt(&cache, Tensor());
  EXPECT_EQ(cache.length(), len);
  EXPECT_EQ(s.log_probs, before);
  EXPECT_EQ(MaxAbsDiff(cache.layers[0].keys, keys), 0.0);
}

TEST(DecoderLmTest, InsertionAfterGenerationMatchesScratch) {
  Rng rng(6);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(2, 8, rng));
  lm.AppendToken(&cache, 5);
  lm.AppendToken(&cache, 3);
  LmStep s = lm.ExtendPrompt(&cache, RandomMatrix(1, 8, rng));
  EXPECT_EQ(cache.num_prompts(), 3);
  EXPECT_EQ(cache.length(), 2 + 3 + 2 + 2);
  EXPECT_LT(MaxDiff(s.log_probs, Scratch(lm, cache).log_probs), 1e-9);
  LmStep next = lm.AppendToken(&cache, 6);
  EXPECT_LT(MaxDiff(next.log_probs, Scratch(lm, cache).log_probs), 1e-9);
}

TEST(DecoderLmTest, TwoSingleInsertionsEqualOneDouble) {
  Rng rng(7);
  DecoderLm lm(SmallLm(), rng);
  Tensor p = RandomMatrix(2, 8, rng);
  KvCache a = lm.Begin(kPrefix, kPostfix), b = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&a, SliceRows(Var(p), 0, 1).value());
  lm.AppendToken(&a, 4);
  lm.ExtendPrompt(&a, SliceRows(Var(p), 1, 2).value());
  lm.ExtendPrompt(&b, p);
  lm.AppendToken(&b, 4);
  EXPECT_LT(MaxDiff(a.last_step.log_probs, b.last_step.log_probs), 1e-9);
  for (int l = 0; l < 3; ++l) {
    EXPECT_LT(MaxAbsDiff(a.layers[l].keys, b.layers[l].keys), 1e-9);
    EXPECT_LT(MaxAbsDiff(a.layers[l].values, b.layers[l].values), 1e-9);
  }
}

TEST(DecoderLmTest, RandomInterleavingsMatchScratch) {
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(100 + trial);
    DecoderLm lm(SmallLm(), rng);
    KvCache cache = lm.Begin(kPrefix, kPostfix);
    lm.ExtendPrompt(&cache, RandomMatrix(1 + static_cast<int>(rng() % 2), 8, rng));
    for (int op = 0; op < 8; ++op) {
      LmStep s;
      if (rng() % 2 == 0) {
        s = lm.ExtendPrompt(&cache, RandomMatrix(static_cast<int>(rng() % 3), 8, rng));
      } else {
        s = lm.AppendToken(&cache, 2 + static_cast<int>(rng() % 5));
      }
      LmStep ref = Scratch(lm, cache);
      ASSERT_LT(MaxDiff(s.log_probs, ref.log_probs), 1e-9) << "trial " << trial << " op " << op;
      ASSERT_LT(MaxAbsDiff(s.hidden_stack, ref.hidden_stack), 1e-9);
    }
  }
}

TEST(DecoderLmTest, SealedCacheRejectsInsertion) {
  Rng rng(8);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(1, 8, rng));
  cache.sealed = true;
  EXPECT_THROW(lm.ExtendPrompt(&cache, RandomMatrix(1, 8, rng)), Error);
}

TEST(DecoderLmTest, OutOfVocabTokenRejected) {
  Rng rng(9);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(1, 8, rng));
  EXPECT_THROW(lm.AppendToken(&cache, 7), DataError);
}

KvCache Started(DecoderLm& lm, Rng& rng) {
  KvCache cache = lm.Begin(kPrefix, kPostfix);
  lm.ExtendPrompt(&cache, RandomMatrix(3, 8, rng, 2.0));
  return cache;
}

int Argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

TEST(BeamSearchTest, BeamOneIsGreedy) {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    DecoderLm lm(SmallLm(), rng);
    KvCache cache = Started(lm, rng);
    Hypothesis h = GenerateConstrained(lm, cache, 4, 1);
    KvCache g = cache;
    std::vector<int> greedy;
    for (int i = 0; i < 4; ++i) {
      const int tok = Argmax(g.last_step.log_probs);
      if (tok == kEosId) break;
      greedy.push_back(tok);
      lm.AppendToken(&g, tok);
    }
    EXPECT_EQ(h.tokens, greedy);
    EXPECT_EQ(h.hidden_stacks.size(), h.tokens.size());
  }
}

TEST(BeamSearchTest, SingleStepIsArgmax) {
  Rng rng(11);
  DecoderLm lm(SmallLm(), rng);
  SetHeadBias(lm, kEosId, -50.0);
  KvCache cache = Started(lm, rng);
  Hypothesis h = GenerateConstrained(lm, cache, 1, 5);
  ASSERT_EQ(h.tokens.size(), 1u);
  EXPECT_EQ(h.tokens[0], Argmax(cache.last_step.log_probs));
  EXPECT_THROW(GenerateConstrained(lm, cache, 0, 5), UsageError);
}

// Best-scoring continuation among all sequences of length `steps` and all
// EOS-terminated sequences no longer than `steps`.
double ExhaustiveBest(DecoderLm& lm, const KvCache& cache, int steps, std::vector<int>* best) {
  double best_score = -INFINITY;
  std::vector<int> seq;
  std::function<void(const KvCache&, double)> rec = [&](const KvCache& c, double score) {
    const auto& lp = c.last_step.log_probs;
    if (static_cast<int>(seq.size()) == steps) {
      if (score > best_score) best_score = score, *best = seq;
      return;
    }
    if (score + lp[kEosId] > best_score) best_score = score + lp[kEosId], *best = seq;
    for (int v = 1; v < static_cast<int>(lp.size()); ++v) {
      KvCache next = c;
      lm.AppendToken(&next, v);
      seq.push_back(v);
      rec(next, score + lp[v]);
      seq.pop_back();
    }
  };
  rec(cache, 0.0);
  return best_score;
}

TEST(BeamSearchTest, FullWidthMatchesExhaustive) {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(300 + seed);
    DecoderLm lm(SmallLm(5), rng);
    KvCache cache = Started(lm, rng);
    std::vector<int> best;
    const double score = ExhaustiveBest(lm, cache, 2, &best);
    Hypothesis h = BeamSearch(lm, cache, 2, 5);
    EXPECT_NEAR(h.score, score, 1e-12);
    EXPECT_EQ(h.tokens, best);
  }
}

TEST(BeamSearchTest, ImmediateEosGivesEmptyTail) {
  Rng rng(12);
  DecoderLm lm(SmallLm(), rng);
  SetHeadBias(lm, kEosId, 60.0);
  KvCache cache = Started(lm, rng);
  Hypothesis h = TailGenerate(lm, cache, 10, 5);
  EXPECT_TRUE(h.tokens.empty());
  EXPECT_TRUE(h.finished);
}

TEST(BeamSearchTest, TailNeverExceedsCap) {
  Rng rng(13);
  DecoderLm lm(SmallLm(), rng);
  SetHeadBias(lm, kEosId, -60.0);
  KvCache cache = Started(lm, rng);
  for (int cap : {0, 1, 4, 9}) {
    Hypothesis h = TailGenerate(lm, cache, cap, 3);
    EXPECT_EQ(static_cast<int>(h.tokens.size()), cap);
    EXPECT_FALSE(h.finished);
  }
}

TEST(BeamSearchTest, ResultCacheContinuesTheBestHypothesis) {
  Rng rng(14);
  DecoderLm lm(SmallLm(), rng);
  KvCache cache = Started(lm, rng);
  Hypothesis h = GenerateConstrained(lm, cache, 3, 4);
  EXPECT_EQ(h.cache.generated_ids, h.tokens);
  EXPECT_LT(MaxDiff(h.cache.last_step.log_probs, Scratch(lm, h.cache).log_probs), 1e-9);
}

TEST(LayerFusionTest, OneHotAndUniform) {
  Rng rng(15);
  std::vector<Var> hs;
  for (int m = 0; m < 3; ++m) hs.emplace_back(RandomMatrix(4, 5, rng));
  LayerFusion fusion(3);
  Var uniform = fusion.Fuse(hs, nullptr);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) {
      const double mean = (hs[0]->at(i, j) + hs[1]->at(i, j) + hs[2]->at(i, j)) / 3.0;
      EXPECT_NEAR(uniform->at(i, j), mean, 1e-12);
    }
  fusion.beta.value = Tensor::Matrix(1, 3, {-1e3, 0.0, -1e3});
  EXPECT_EQ(MaxAbsDiff(fusion.Fuse(hs, nullptr).value(), hs[1].value()), 0.0);
  double total = 0;
  for (double w : fusion.Weights()) {
    EXPECT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(LayerFusionTest, ShiftInvariance) {
  Rng rng(16);
  std::vector<Var> hs;
  for (int m = 0; m < 4; ++m) hs.emplace_back(RandomMatrix(2, 3, rng));
  LayerFusion a(4), b(4);
  a.beta.value = Tensor::Matrix(1, 4, {0.3, -1.0, 2.0, 0.5});
  b.beta.value = Tensor::Matrix(1, 4, {5.3, 4.0, 7.0, 5.5});
  EXPECT_LT(MaxAbsDiff(a.Fuse(hs, nullptr).value(), b.Fuse(hs, nullptr).value()), 1e-12);
}

TEST(LayerFusionTest, StackMatchesFuse) {
  Rng rng(17);
  LayerFusion fusion(3);
  fusion.beta.value = Tensor::Matrix(1, 3, {0.2, -0.4, 1.0});
  Tensor stack = RandomMatrix(3, 6, rng);
  std::vector<Var> hs;
  for (int m = 0; m < 3; ++m) hs.push_back(SliceRows(Var(stack), m, m + 1));
  EXPECT_LT(MaxAbsDiff(fusion.FuseStack(stack), fusion.Fuse(hs, nullptr).value()), 1e-15);
}

TEST(LayerFusionTest, GradientReachesBeta) {
  Rng rng(18);
  std::vector<Tensor> hs;
  for (int m = 0; m < 3; ++m) hs.push_back(RandomMatrix(2, 3, rng));
  Tensor w = RandomMatrix(2, 3, rng);
  const double err = GradCheck({RandomMatrix(1, 3, rng)}, [&](std::vector<Var>& v) {
    // Same arithmetic as LayerFusion::Fuse with beta as a tape input.
    const Var wts = Softmax(v[0]);
    Var out = ScaleBy(Var(hs[0]), Element(wts, 0, 0));
    for (int m = 1; m < 3; ++m) out = Add(out, ScaleBy(Var(hs[m]), Element(wts, 0, m)));
    return Sum(Mul(out, Var(w)));
  });
  EXPECT_LT(err, 1e-6);

  // Through the parameter path used in training.
  LayerFusion f(3);
  Tape tape;
  std::vector<Var> vs;
  for (const Tensor& h : hs) vs.emplace_back(h);
  tape.Backward(Sum(Mul(f.Fuse(vs, &tape), Var(w))));
  double norm = 0;
  for (double g : f.beta.grad) norm += g * g;
  EXPECT_GT(norm, 0.0);
}

}  // namespace
}  // namespace simuls2s
