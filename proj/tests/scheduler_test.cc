// tests/scheduler_test.cc

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

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "simuls2s/base/error.h"
#include "scheduler_checks.h"
#include "simuls2s/scheduler/scheduler.h"
#include "simuls2s/vocoder/vocoder.h"

namespace simuls2s {
namespace {

using testing::BaseConfig;
using testing::CheckSession;
using testing::RandomFrames;
using testing::TinyBundle;

TEST(SchedulerFormula, WaitKGenLength) {
  EXPECT_EQ(WaitKGenLength(6, 2, 3), 2);
  EXPECT_EQ(WaitKGenLength(3, 0, 3), 1);  // first token at prompt length k
  EXPECT_EQ(WaitKGenLength(4, 1, 3), 1);  // second token one prompt later
  EXPECT_EQ(WaitKGenLength(2, 0, 3), 0);
  EXPECT_EQ(WaitKGenLength(5, 3, 3), 0);
}

TEST(SchedulerFormula, TailLength) {
  EXPECT_EQ(TailLength(0.15, 100), 15);
  EXPECT_EQ(TailLength(0.15, 101), 16);
  EXPECT_EQ(TailLength(0.15, 1), 1);
  EXPECT_EQ(TailLength(0.5, 37), 19);
}

TEST(Scheduler, RandomizedGateAndAppendOnly) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::unique_ptr<TinyBundle>> bundles;
  for (int s = 0; s < 4; ++s) bundles.push_back(std::make_unique<TinyBundle>(100 + s));
  std::mt19937_64 rng(17);
  int violations = 0, generated = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    TinyBundle& b = *bundles[trial % bundles.size()];
    SessionConfig c = BaseConfig(1 + static_cast<int>(rng() % 6));
    c.mode = rng() % 3 == 0 ? PromptMode::kStack16 : PromptMode::kCif;
    c.greedy_units = rng() % 4 == 0;
    c.lm_beam = 1 + static_cast<int>(rng() % 3);
    c.ctc_beam = 1 + static_cast<int>(rng() % 4);
    const Tensor frames = RandomFrames(1 + static_cast<int>(rng() % 40), rng);
    const SessionResult r = RunSession(frames, b.Models(rng() % 2 == 0), c);
    const std::string err = CheckSession(r, c);
    if (!err.empty()) {
      ++violations;
      ADD_FAILURE() << "trial " << trial << ": " << err;
    }
    generated += static_cast<int>(r.text.size());
  }
  EXPECT_EQ(violations, 0);
  EXPECT_GT(generated, 1000);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::minutes(2));
}

TEST(Scheduler, GenerationMatchesBudgetWithoutEos) {
  // Unless the LM stops early, after every pre-Final chunk exactly
  // max(0, L_p - k + 1) tokens have been committed.
  TinyBundle b(7);
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const SessionConfig c = BaseConfig(1 + trial % 4);
    const SessionResult r = RunSession(RandomFrames(32, rng), b.Models(), c);
    int total = 0;
    for (const ChunkTrace& tr : r.trace) {
      if (tr.final || tr.eos) break;
      total += tr.generated;
      EXPECT_EQ(total, std::max(0, tr.prompts - c.k + 1));
      if (tr.budget <= 0) {
        EXPECT_EQ(tr.generated, 0);
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Scheduler, ReadTimes) {
  TinyBundle b(9);
  std::mt19937_64 rng(10);
  const SessionResult r = RunSession(RandomFrames(10, rng), b.Models(), BaseConfig(2));
  std::vector<double> reads;
  for (const auto& e : r.log.events)
    if (e.kind == EventKind::kReadChunk) reads.push_back(e.t_ms);
  EXPECT_EQ(reads, (std::vector<double>{80, 160, 200}));
  EXPECT_EQ(r.source_ms, 200.0);
}

TEST(Scheduler, Deterministic) {
  TinyBundle a(11), b(11);
  std::mt19937_64 rng(12);
  const Tensor frames = RandomFrames(27, rng);
  for (PromptMode mode : {PromptMode::kCif, PromptMode::kStack16}) {
    SessionConfig c = BaseConfig(2);
    c.mode = mode;
    EXPECT_EQ(ToJsonl(RunSession(frames, a.Models(), c).log),
              ToJsonl(RunSession(frames, b.Models(), c).log));
  }
}

TEST(Scheduler, WallClockOnlyWhenRequested) {
  TinyBundle b(13);
  std::mt19937_64 rng(14);
  const Tensor frames = RandomFrames(12, rng);
  SessionConfig c = BaseConfig(1);
  for (const auto& e : RunSession(frames, b.Models(), c).log.events) EXPECT_FALSE(e.wall_ns);
  c.record_wall_clock = true;
  SessionLog log = RunSession(frames, b.Models(), c).log;
  for (const auto& e : log.events) EXPECT_TRUE(e.wall_ns);
  std::istringstream is(ToJsonl(log));
  EXPECT_EQ(ReadJsonl(is).events.size(), log.events.size());
}

TEST(Scheduler, OfflineEqualsLargeK) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    TinyBundle b(200 + trial);
    const Tensor frames = RandomFrames(5 + trial * 2, rng);
    for (PromptMode mode : {PromptMode::kCif, PromptMode::kStack16}) {
      SessionConfig c = BaseConfig(1000);
      c.mode = mode;
      c.greedy_units = trial % 3 == 0;
      const SessionResult on = RunSession(frames, b.Models(), c);
      const SessionResult off = RunOffline(frames, b.Models(), c);
      EXPECT_EQ(on.text, off.text);
      EXPECT_EQ(on.units, off.units);
      EXPECT_EQ(on.trace.back().prompts, off.trace.back().prompts);
      EXPECT_EQ(CheckSession(off, c), "");

      const int chunks = (frames.rows() + 3) / 4;
      int reads = 0;
      bool write_before_last_read = false;
      for (const auto& e : off.log.events) {
        if (e.kind == EventKind::kReadChunk) {
          ++reads;
        } else {
          write_before_last_read |= reads < chunks;
          EXPECT_EQ(e.t_ms, off.source_ms);
        }
      }
      EXPECT_EQ(reads, chunks);
      EXPECT_FALSE(write_before_last_read);
    }
  }
}

TEST(Scheduler, FirstGenerationChunkMonotoneInK) {
  TinyBundle b(21);
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor frames = RandomFrames(40, rng);
    double prev_attempt = -1, prev_text = -1;
    for (int k = 1; k <= 8; ++k) {
      const SessionResult r = RunSession(frames, b.Models(), BaseConfig(k));
      bool eos = false;
      double attempt = r.source_ms;
      for (const auto& tr : r.trace) {
        eos |= !tr.final && tr.eos;
        if (tr.final || tr.budget > 0) {
          attempt = std::min(r.source_ms, (tr.chunk + 1) * 4 * 20.0);
          break;
        }
      }
      EXPECT_GE(attempt, prev_attempt);
      prev_attempt = attempt;
      const auto delays = [&] {
        std::vector<double> d;
        for (const auto& e : r.log.events)
          if (e.kind == EventKind::kTextToken) d.push_back(e.t_ms);
        return d;
      }();
      // The first text emission follows the first attempt unless a pre-Final
      // EOS delayed it.
      if (!delays.empty() && !eos) {
        EXPECT_EQ(delays.front(), attempt);
        EXPECT_GE(delays.front(), prev_text);
        prev_text = delays.front();
      }
    }
  }
}

TEST(Scheduler, Errors) {
  TinyBundle b(31);
  std::mt19937_64 rng(32);
  const Tensor frames = RandomFrames(8, rng);
  EXPECT_THROW(RunSession(Tensor(), b.Models(), BaseConfig(1)), DataError);
  EXPECT_THROW(RunSession(frames, b.Models(), BaseConfig(0)), UsageError);
  SessionConfig c = BaseConfig(1);
  c.l_max_ratio = 0.0;
  EXPECT_THROW(RunSession(frames, b.Models(), c), UsageError);
  c = BaseConfig(1);
  c.chunk_size_frames = 5;
  EXPECT_THROW(RunSession(frames, b.Models(), c), UsageError);
  LayerFusion wrong(3);
  SessionModels m = b.Models();
  m.fusion = &wrong;
  EXPECT_THROW(RunSession(frames, m, BaseConfig(1)), DataError);
  EXPECT_THROW(ParsePromptMode("stack8"), UsageError);
}

}  // namespace
}  // namespace simuls2s
