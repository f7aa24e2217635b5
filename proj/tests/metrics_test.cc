// tests/metrics_test.cc

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
#include <random>

#include <gtest/gtest.h>

#include "simuls2s/base/error.h"
#include "simuls2s/metrics/bleu.h"
#include "simuls2s/metrics/latency.h"

namespace simuls2s {
namespace {

// Two 500 ms reads (25 frames each); one text token and one 500 ms waveform
// segment after each read, the first at 600 ms.
SessionLog FixtureLog() {
  SessionLog log;
  log.Add(EventKind::kReadChunk, 500, {{"chunk", 0}, {"frames", 25}});
  log.Add(EventKind::kTextToken, 600, {{"token", 7}, {"index", 0}});
  log.Add(EventKind::kWaveformSegment, 600, {{"duration_ms", 500.0}, {"tokens", 25}, {"samples", 8000}});
  log.Add(EventKind::kReadChunk, 1000, {{"chunk", 1}, {"frames", 25}});
  log.Add(EventKind::kTextToken, 1000, {{"token", 8}, {"index", 1}});
  log.Add(EventKind::kWaveformSegment, 1000, {{"duration_ms", 500.0}, {"tokens", 25}, {"samples", 8000}});
  return log;
}

TEST(AverageLagging, HandFixture) {
  const std::vector<double> d{600, 1000};
  EXPECT_EQ(AverageLagging(d, 1000, 2), 550.0);
}

TEST(AverageLagging, IdealAnticipationBound) {
  for (int n = 1; n <= 9; ++n) {
    const std::vector<double> d(n, 0.0);
    EXPECT_NEAR(AverageLagging(d, 1000, n), -(n - 1) * 1000.0 / (2.0 * n), 1e-9);
  }
}

TEST(AverageLagging, SingleWordAtEnd) {
  const std::vector<double> d{1000};
  EXPECT_EQ(AverageLagging(d, 1000, 3), 1000.0);
}

TEST(AverageLagging, CutoffAtFirstDelayReachingSource) {
  // Words after the first one emitted at T do not count.
  const std::vector<double> a{600, 1000}, b{600, 1000, 1000, 1000};
  EXPECT_EQ(AverageLagging(a, 1000, 2), AverageLagging(b, 1000, 2));
}

TEST(AverageLagging, EmptyHypothesisIsError) {
  EXPECT_THROW(AverageLagging({}, 1000, 2), DataError);
  EXPECT_THROW(LengthAdaptiveAverageLagging({}, 1000, 2), DataError);
}

TEST(AverageLagging, TranslationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 400);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> d(1 + rng() % 6);
    double t = 0;
    for (double& x : d) x = t += u(rng);
    const double src = d.back() + 1000.0;  // tau = |Y| before and after the shift
    const double shift = u(rng);
    std::vector<double> shifted = d;
    for (double& x : shifted) x += shift;
    const int ref = 1 + static_cast<int>(rng() % 6);
    EXPECT_NEAR(AverageLagging(shifted, src, ref), AverageLagging(d, src, ref) + shift, 1e-9);
  }
}

TEST(Laal, EqualsAlWhenHypothesisNotLonger) {
  const std::vector<double> d{600, 1000};
  EXPECT_EQ(LengthAdaptiveAverageLagging(d, 1000, 2), AverageLagging(d, 1000, 2));
  EXPECT_EQ(LengthAdaptiveAverageLagging(d, 1000, 5), AverageLagging(d, 1000, 5));
}

TEST(Laal, LongHypothesisDoublesDenominator) {
  const std::vector<double> d{200, 400, 600, 1000};
  const double laal = LengthAdaptiveAverageLagging(d, 1000, 2);
  EXPECT_GE(laal, AverageLagging(d, 1000, 2));
  EXPECT_EQ(laal, AverageLagging(d, 1000, 4));
}

TEST(Atd, HandFixture) {
  const std::vector<TimedSegment> in{{500, 500}, {1000, 500}};
  const std::vector<TimedSegment> out{{600, 500}, {1000, 500}};
  EXPECT_EQ(AverageTokenDelay(in, out), 50.0);
}

TEST(Atd, OutputAtInputCompletionIsZero) {
  const std::vector<TimedSegment> in{{500, 500}, {1000, 500}};
  const std::vector<TimedSegment> out{{500, 500}, {1000, 500}};
  EXPECT_EQ(AverageTokenDelay(in, out), 0.0);
}

TEST(Atd, OutputLongerThanInputUsesLastInput) {
  const std::vector<TimedSegment> in{{500, 500}};
  const std::vector<TimedSegment> out{{600, 400}, {900, 400}};
  EXPECT_EQ(AverageTokenDelay(in, out), 250.0);
}

TEST(Atd, MonotoneInEmissionTimes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 300);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TimedSegment> in, out;
    double t = 0;
    for (int i = 0; i < 4; ++i) in.push_back({t += 320, 320});
    t = 0;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 60); ++i) out.push_back({t += u(rng) / 10, 20});
    std::vector<TimedSegment> later = out;
    for (auto& s : later) s.time_ms += u(rng);
    EXPECT_GE(AverageTokenDelay(in, later), AverageTokenDelay(in, out));
    const auto [s0, e0] = Offsets(out, 1280);
    const auto [s1, e1] = Offsets(later, 1280);
    EXPECT_GE(s1, s0);
    EXPECT_GE(e1, e0);
  }
}

TEST(Atd, OfflineBound) {
  // All outputs at or after T: ATD >= StartOffset - T.
  const std::vector<TimedSegment> in{{320, 320}, {640, 320}, {800, 160}};
  std::vector<TimedSegment> out;
  for (int i = 0; i < 70; ++i) out.push_back({800.0 + (i / 10) * 5, 20});
  const auto [start, end] = Offsets(out, 800);
  EXPECT_GE(AverageTokenDelay(in, out), start - 800);
  (void)end;
}

TEST(Offsets, FixtureAndErrors) {
  const std::vector<TimedSegment> out{{600, 500}, {1000, 500}};
  const auto [start, end] = Offsets(out, 1000);
  EXPECT_EQ(start, 600.0);
  EXPECT_EQ(end, 0.0);
  EXPECT_THROW(Offsets({}, 1000), DataError);
}

TEST(ComputeLatency, FixtureLog) {
  const LatencyReport r = ComputeLatency(FixtureLog(), 1000, 2);
  EXPECT_EQ(r.al_ms, 550.0);
  EXPECT_EQ(r.laal_ms, 550.0);
  EXPECT_EQ(r.atd_ms, 50.0);
  EXPECT_EQ(r.start_offset_ms, 600.0);
  EXPECT_EQ(r.end_offset_ms, 0.0);
}

TEST(ComputeLatency, IgnoresWaveformContent) {
  SessionLog a = FixtureLog(), b = FixtureLog();
  b.events[2].payload["samples"] = 1;
  b.events[2].payload["units"] = {1, 2, 3};
  const LatencyReport ra = ComputeLatency(a, 1000, 2), rb = ComputeLatency(b, 1000, 2);
  EXPECT_EQ(ra.atd_ms, rb.atd_ms);
  EXPECT_EQ(ra.al_ms, rb.al_ms);
}

TEST(Bleu, ShortHypothesisFixture) {
  const double bleu = CorpusBleu(std::vector<std::string>{"a b c"}, std::vector<std::string>{"a b c d"});
  EXPECT_NEAR(bleu, 100.0 * std::exp(1.0 - 4.0 / 3.0), 1e-9);
  EXPECT_NEAR(bleu, 71.65, 0.01);
}

TEST(Bleu, IdentityAndDisjoint) {
  const std::vector<std::string> ref{"x y z w v", "p q r s"};
  EXPECT_NEAR(CorpusBleu(ref, ref), 100.0, 1e-9);
  EXPECT_LT(CorpusBleu(std::vector<std::string>{"a b c d e", "f g h i"}, ref), 1e-6);
}

TEST(Bleu, EmptyCorpusAndMismatch) {
  EXPECT_EQ(CorpusBleu(std::vector<std::vector<int>>{{}}, std::vector<std::vector<int>>{{1, 2}}), 0.0);
  EXPECT_THROW(CorpusBleu(std::vector<std::vector<int>>{{1}}, std::vector<std::vector<int>>{}),
               DataError);
}

TEST(Bleu, ClippedCounts) {
  // "the the the" against "the cat": unigram precision 1/3, no higher orders
  // matched, so with the 1e-9 floor the score is tiny but non-zero.
  const std::vector<std::vector<int>> hyp{{1, 1, 1}}, ref{{1, 2}};
  const BleuStats s = CollectBleuStats(hyp, ref, 4);
  EXPECT_EQ(s.matches[0], 1.0);
  EXPECT_EQ(s.totals[0], 3.0);
  EXPECT_EQ(s.totals[2], 1.0);
  EXPECT_EQ(s.totals[3], 0.0);
  const double expected = 100.0 * std::exp((std::log(1.0 / 3) + 2 * std::log(1e-9)) / 3);
  EXPECT_NEAR(CorpusBleu(hyp, ref, 4), expected, 1e-12);
}

}  // namespace
}  // namespace simuls2s
