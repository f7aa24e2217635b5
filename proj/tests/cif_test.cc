// tests/cif_test.cc

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

#include <gtest/gtest.h>

#include "simuls2s/base/error.h"
#include "simuls2s/cif/cif.h"
#include "test_util.h"

namespace simuls2s {
namespace {

using testing::GradCheck;
using testing::RandomMatrix;

// Encoder-style frame whose last dim gives exactly `alpha`.
std::vector<double> Frame(std::vector<double> values, double alpha) {
  values.push_back(std::log(alpha / (1.0 - alpha)));
  return values;
}

TEST(CifAlphaTest, SigmoidOfLastDim) {
  std::vector<double> f{1.0, -2.0, 0.0};
  EXPECT_EQ(CifAlpha(f), 0.5);
  std::vector<double> big{1.0, 50.0};
  EXPECT_NEAR(CifAlpha(big), 1.0, 1e-15);
  std::vector<double> g{0.3, 0.7};
  EXPECT_EQ(CifAlpha(g), Sigmoid(Var(Tensor::Scalar(0.7)))->item());
}

TEST(CifStepTest, HandAccumulation) {
  const std::vector<double> alphas{0.3, 0.3, 0.2, 0.1, 0.4};
  CifState state;
  std::vector<PromptVector> fired;
  for (int t = 0; t < 5; ++t) {
    const std::vector<double> e{static_cast<double>(t + 1), 10.0 * (t + 1)};
    auto f = CifStepWeighted(&state, alphas[t], e);
    if (t < 4) {
      EXPECT_TRUE(f.empty());
    }
    fired.insert(fired.end(), f.begin(), f.end());
  }
  ASSERT_EQ(fired.size(), 1u);
  EXPECT_EQ(fired[0].fire_frame, 4);
  const double expect0 = 0.3 * 1 + 0.3 * 2 + 0.2 * 3 + 0.1 * 4 + 0.1 * 5;
  EXPECT_NEAR(fired[0].values[0], expect0, 1e-12);
  EXPECT_NEAR(fired[0].values[1], 10 * expect0, 1e-12);
  EXPECT_NEAR(state.accum, 0.3, 1e-12);
  EXPECT_NEAR(state.carry[0], 0.3 * 5, 1e-12);
  EXPECT_NEAR(state.carry[1], 0.3 * 50, 1e-12);
}

TEST(CifStepTest, ZeroWeightNeverFires) {
  CifState state;
  const std::vector<double> e{1.0};
  for (int t = 0; t < 100; ++t) EXPECT_TRUE(CifStepWeighted(&state, 0.0, e).empty());
  EXPECT_FALSE(CifFinalize(&state).has_value());
}

TEST(CifStepTest, LargeWeightFiresRepeatedly) {
  CifState state;
  const std::vector<double> e{2.0};
  auto f = CifStepWeighted(&state, 2.5, e);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].values[0], 2.0);
  EXPECT_EQ(f[1].values[0], 2.0);
  EXPECT_EQ(f[0].fire_frame, 0);
  EXPECT_EQ(f[1].fire_frame, 0);
  EXPECT_NEAR(state.accum, 0.5, 1e-15);
  EXPECT_NEAR(state.carry[0], 1.0, 1e-15);
}

TEST(CifFinalizeTest, ResidualRule) {
  const std::vector<double> e{1.0};
  for (auto [residual, expect] : {std::pair{0.6, true}, {0.4, false}, {0.0, false}, {0.5, true}}) {
    CifState state;
    CifStepWeighted(&state, residual, e);
    auto p = CifFinalize(&state);
    EXPECT_EQ(p.has_value(), expect) << residual;
    if (p) {
      EXPECT_NEAR(p->values[0], residual, 1e-15);
    }
  }
  CifState never;
  EXPECT_FALSE(CifFinalize(&never).has_value());
  EXPECT_THROW(CifStepWeighted(&never, 0.2, e), ShapeError);
}

TEST(CifStepTest, UsesLastDimOfFrame) {
  CifState state;
  auto f1 = CifStep(&state, Frame({1.0, 2.0}, 0.75));
  EXPECT_TRUE(f1.empty());
  auto f2 = CifStep(&state, Frame({3.0, 4.0}, 0.75));
  ASSERT_EQ(f2.size(), 1u);
  EXPECT_NEAR(f2[0].values[0], 0.75 * 1 + 0.25 * 3, 1e-12);
  EXPECT_NEAR(f2[0].values[1], 0.75 * 2 + 0.25 * 4, 1e-12);
  EXPECT_EQ(f2[0].values.size(), 2u);
}

// Prompts from the frame-by-frame state machine equal the cumulative-sum
// overlap formulation applied to the whole sequence at once.
TEST(CifPropertyTest, StreamingMatchesWholeSequence) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 60);
    Tensor frames = RandomMatrix(T, 4, rng, 1.5);
    auto streamed = CifRunAll(frames, false);
    Var enc(frames);
    Tensor whole = CifIntegrate(CifAlphas(enc), CifValues(enc),
                                static_cast<int>(streamed.size())).value();
    ASSERT_EQ(whole.rows(), static_cast<int>(streamed.size()));
    for (std::size_t i = 0; i < streamed.size(); ++i)
      for (int j = 0; j < 3; ++j) ASSERT_NEAR(streamed[i].values[j], whole.at(i, j), 1e-12);
  }
}

TEST(CifPropertyTest, ConservationAndMonotonicity) {
  Rng rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    // With all values equal to 1 each prompt's value is its total weight.
    CifState state;
    const std::vector<double> one{1.0};
    std::size_t count = 0;
    double total = 0.0;
    for (int t = 0; t < 80; ++t) {
      const double a = trial % 3 == 0 ? 3.0 * u(rng) : u(rng);
      total += a;
      auto f = CifStepWeighted(&state, a, one);
      for (const auto& p : f) ASSERT_NEAR(p.values[0], 1.0, 1e-12);
      const std::size_t before = count;
      count += f.size();
      ASSERT_GE(count, before);
      ASSERT_LT(state.accum, 1.0);
      ASSERT_NEAR(state.carry[0], state.accum, 1e-12);
    }
    EXPECT_NEAR(static_cast<double>(count) + state.accum, total, 1e-9);
  }
}

TEST(CifPropertyTest, FireFramesOrdered) {
  Rng rng(23);
  Tensor frames = RandomMatrix(200, 3, rng, 2.0);
  auto prompts = CifRunAll(frames, false);
  for (std::size_t i = 1; i < prompts.size(); ++i) {
    EXPECT_GT(prompts[i].fire_frame, prompts[i - 1].fire_frame);
  }
}

TEST(QuantityLossTest, Formula) {
  Var a(Tensor::Matrix(2, 1, {0.5, 0.8}));
  EXPECT_NEAR(QuantityLoss(a, 1)->item(), 0.3, 1e-15);
  EXPECT_NEAR(QuantityLoss(a, 2)->item(), 0.7, 1e-15);
  EXPECT_EQ(QuantityLoss(Var(Tensor::Matrix(2, 1, {0.5, 0.5})), 1)->item(), 0.0);
}

TEST(QuantityLossTest, GradientThroughSigmoid) {
  Rng rng(24);
  Tensor logits = RandomMatrix(6, 1, rng);
  for (int n : {0, 2, 9}) {
    const double err = GradCheck({logits}, [&](std::vector<Var>& v) {
      return QuantityLoss(Sigmoid(v[0]), n);
    });
    EXPECT_LT(err, 1e-6) << n;
    // Closed form: sign(sum - N) * sigmoid'(x).
    Tape tape;
    Var x = tape.Leaf(logits);
    Var a = Sigmoid(x);
    double s = 0;
    for (int t = 0; t < 6; ++t) s += a->at(t, 0);
    tape.Backward(QuantityLoss(a, n));
    Tensor g = tape.Grad(x);
    for (int t = 0; t < 6; ++t) {
      const double sg = a->at(t, 0) * (1 - a->at(t, 0));
      EXPECT_NEAR(g[t], (s > n ? 1.0 : -1.0) * sg, 1e-12);
    }
  }
}

TEST(ScaleAlphasTest, Proportional) {
  Var a(Tensor::Matrix(3, 1, {0.2, 0.6, 1.2}));
  Var s = ScaleAlphas(a, 1);
  EXPECT_NEAR(s->at(0, 0), 0.1, 1e-15);
  EXPECT_NEAR(s->at(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(s->at(2, 0), 0.6, 1e-15);
  Var z = ScaleAlphas(a, 0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(z->at(t, 0), 0.0);
}

TEST(ScaleAlphasTest, FiringCountEqualsTarget) {
  Rng rng(25);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng() % 21);
    const int T = std::max(1, n) + static_cast<int>(rng() % 40);
    std::vector<double> a(T);
    for (double& x : a) x = u(rng);
    Var scaled = ScaleAlphas(Var(Tensor::Matrix(T, 1, a)), n);
    CifState state;
    const std::vector<double> one{1.0};
    int count = 0;
    for (int t = 0; t < T; ++t) count += CifStepWeighted(&state, scaled->at(t, 0), one).size();
    if (CifFinalize(&state)) ++count;
    ASSERT_EQ(count, n) << "trial " << trial;
  }
}

TEST(ScaleAlphasTest, Gradient) {
  Rng rng(26);
  Tensor logits = RandomMatrix(5, 1, rng);
  Tensor w = RandomMatrix(5, 1, rng);
  const double err = GradCheck({logits}, [&](std::vector<Var>& v) {
    return Sum(Mul(ScaleAlphas(Sigmoid(v[0]), 3), Var(w)));
  });
  EXPECT_LT(err, 1e-6);
}

TEST(CifIntegrateTest, ScaledIntegrationMatchesStateMachine) {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 4 + static_cast<int>(rng() % 30);
    const int n = 1 + static_cast<int>(rng() % 8);
    Var enc(RandomMatrix(T, 5, rng));
    Tensor scaled = ScaleAlphas(CifAlphas(enc), n).value();
    Tensor integrated = CifIntegrate(Var(scaled), CifValues(enc), n).value();
    CifState state;
    std::vector<PromptVector> prompts;
    for (int t = 0; t < T; ++t) {
      auto f = CifStepWeighted(&state, scaled.at(t, 0), CifValues(enc)->row(t));
      prompts.insert(prompts.end(), f.begin(), f.end());
    }
    if (auto last = CifFinalize(&state)) prompts.push_back(*last);
    ASSERT_EQ(static_cast<int>(prompts.size()), n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 4; ++j) ASSERT_NEAR(prompts[i].values[j], integrated.at(i, j), 1e-12);
  }
}

TEST(CifIntegrateTest, GradientMatchesFiniteDifferences) {
  Rng rng(28);
  for (int n : {1, 3, 6}) {
    Tensor logits = RandomMatrix(7, 1, rng);
    Tensor values = RandomMatrix(7, 3, rng);
    Tensor w = RandomMatrix(n, 3, rng);
    const double err = GradCheck({logits, values}, [&](std::vector<Var>& v) {
      return Sum(Mul(CifIntegrate(ScaleAlphas(Sigmoid(v[0]), n), v[1], n), Var(w)));
    });
    EXPECT_LT(err, 1e-5) << n;
  }
}

TEST(PromptProjectorTest, MatchesLinear) {
  Rng rng(29);
  PromptProjector proj(3, 6, rng);
  std::vector<PromptVector> ps{{{1.0, 2.0, 3.0}, 0}, {{-1.0, 0.5, 0.0}, 2}};
  Tensor a = proj.Project(ps);
  Tensor b = proj.Forward(Var(Tensor::Matrix(2, 3, {1, 2, 3, -1, 0.5, 0})), nullptr).value();
  EXPECT_EQ(MaxAbsDiff(a, b), 0.0);
  EXPECT_EQ(proj.Project({}).rows(), 0);
}

}  // namespace
}  // namespace simuls2s
