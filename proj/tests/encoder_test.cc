// tests/encoder_test.cc

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

#include <gtest/gtest.h>

#include "simuls2s/base/error.h"
#include "simuls2s/encoder/encoder.h"
#include "test_util.h"

namespace simuls2s {
namespace {

using testing::GradCheck;
using testing::RandomMatrix;

EncoderConfig SmallConfig(int chunk) {
  EncoderConfig c;
  c.d_in = 5;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_ff = 12;
  c.chunk_size_frames = chunk;
  return c;
}

Tensor StreamAll(Encoder& enc, const Tensor& frames) {
  EncoderState state;
  const int chunk = enc.config().chunk_size_frames;
  std::vector<double> out;
  for (int start = 0; start < frames.rows(); start += chunk) {
    const int end = std::min(frames.rows(), start + chunk);
    Tensor piece = SliceRows(Var(frames), start, end).value();
    Tensor y = enc.EncodeStream(&state, piece, end == frames.rows());
    out.insert(out.end(), y.data().begin(), y.data().end());
  }
  return Tensor::Matrix(frames.rows(), enc.config().d_model, std::move(out));
}

TEST(EncoderTest, SingleFrame) {
  Rng rng(3);
  Encoder enc(SmallConfig(4), rng);
  Tensor x = RandomMatrix(1, 5, rng);
  Var y = enc.EncodeOffline(Var(x), nullptr);
  EXPECT_EQ(y->rows(), 1);
  EXPECT_EQ(y->cols(), 8);
}

TEST(EncoderTest, EmptyInputThrows) {
  Rng rng(3);
  Encoder enc(SmallConfig(4), rng);
  EXPECT_THROW(enc.EncodeOffline(Var(Tensor::Zeros({0, 5})), nullptr), ShapeError);
}

TEST(EncoderTest, FutureChunkPerturbationLeavesPastUnchanged) {
  Rng rng(4);
  const int chunk = 3;
  Encoder enc(SmallConfig(chunk), rng);
  Tensor x = RandomMatrix(11, 5, rng);
  Tensor base = enc.EncodeOffline(Var(x), nullptr).value();
  for (int j = 0; j < 4; ++j) {
    const int frame = std::min(10, j * chunk + 1);
    std::vector<double> d = x.ToVector();
    d[frame * 5 + 2] += 3.0;
    Tensor y = enc.EncodeOffline(Var(Tensor::Matrix(11, 5, d)), nullptr).value();
    for (int t = 0; t < j * chunk; ++t)
      for (int c = 0; c < 8; ++c) EXPECT_EQ(y.at(t, c), base.at(t, c)) << "t=" << t;
    // Frames in the perturbed chunk do see the change.
    double diff = 0.0;
    for (int c = 0; c < 8; ++c) diff += std::fabs(y.at(j * chunk, c) - base.at(j * chunk, c));
    EXPECT_GT(diff, 0.0);
  }
}

TEST(EncoderTest, OneChunkIsBidirectional) {
  Rng rng(5);
  Encoder enc(SmallConfig(6), rng);
  Tensor x = RandomMatrix(6, 5, rng);
  Tensor base = enc.EncodeOffline(Var(x), nullptr).value();
  std::vector<double> d = x.ToVector();
  d[5 * 5] += 1.0;
  Tensor y = enc.EncodeOffline(Var(Tensor::Matrix(6, 5, d)), nullptr).value();
  double diff = 0.0;
  for (int c = 0; c < 8; ++c) diff += std::fabs(y.at(0, c) - base.at(0, c));
  EXPECT_GT(diff, 1e-9);
}

TEST(EncoderTest, StreamingMatchesOfflineTwoChunks) {
  Rng rng(6);
  Encoder enc(SmallConfig(4), rng);
  Tensor x = RandomMatrix(8, 5, rng);
  EXPECT_LT(MaxAbsDiff(StreamAll(enc, x), enc.EncodeOffline(Var(x), nullptr).value()), 1e-9);
}

TEST(EncoderTest, StreamingMatchesOfflineRandomLengths) {
  Rng rng(7);
  std::uniform_int_distribution<int> len(1, 256), chunk(1, 40);
  for (int seed = 0; seed < 100; ++seed) {
    Rng local(1000 + seed);
    Encoder enc(SmallConfig(chunk(rng)), local);
    Tensor x = RandomMatrix(len(rng), 5, local);
    const double diff = MaxAbsDiff(StreamAll(enc, x), enc.EncodeOffline(Var(x), nullptr).value());
    ASSERT_LT(diff, 1e-9) << "seed " << seed << " T=" << x.rows();
  }
}

TEST(EncoderTest, SingleChunkStreamEqualsOffline) {
  Rng rng(8);
  Encoder enc(SmallConfig(5), rng);
  Tensor x = RandomMatrix(5, 5, rng);
  EncoderState state;
  Tensor y = enc.EncodeStream(&state, x, false);
  EXPECT_LT(MaxAbsDiff(y, enc.EncodeOffline(Var(x), nullptr).value()), 1e-9);
  EXPECT_EQ(state.completed_chunks, 1);
  EXPECT_EQ(state.cached_frames.size(), 25u);
}

TEST(EncoderTest, PartialChunkNeedsFinal) {
  Rng rng(9);
  Encoder enc(SmallConfig(4), rng);
  EncoderState state;
  EXPECT_THROW(enc.EncodeStream(&state, RandomMatrix(3, 5, rng), false), ShapeError);
  EncoderState other;
  enc.EncodeStream(&other, RandomMatrix(4, 5, rng), false);
  Tensor last = enc.EncodeStream(&other, RandomMatrix(1, 5, rng), true);
  EXPECT_EQ(last.rows(), 1);
  EXPECT_THROW(enc.EncodeStream(&other, RandomMatrix(4, 5, rng), false), ShapeError);
}

TEST(EncoderTest, OversizedChunkThrows) {
  Rng rng(9);
  Encoder enc(SmallConfig(4), rng);
  EncoderState state;
  EXPECT_THROW(enc.EncodeStream(&state, RandomMatrix(5, 5, rng), true), ShapeError);
}

TEST(EncoderTest, ConfigValidation) {
  EncoderConfig c = SmallConfig(0);
  EXPECT_THROW(c.Validate(), UsageError);
  c = SmallConfig(4);
  c.n_heads = 3;
  EXPECT_THROW(c.Validate(), UsageError);
  EXPECT_EQ(EncoderConfig::FromJson(SmallConfig(7).ToJson()).chunk_size_frames, 7);
}

TEST(EncoderTest, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  Encoder enc(SmallConfig(2), rng);
  Tensor x = RandomMatrix(5, 5, rng);
  Tensor w = RandomMatrix(5, 8, rng);
  const double err = GradCheck({x}, [&](std::vector<Var>& v) {
    return Sum(Mul(enc.EncodeOffline(v[0], v[0].tape()), Var(w)));
  });
  EXPECT_LT(err, 1e-4);
}

TEST(StackDownsampleTest, GroupCounts) {
  Rng rng(11);
  EXPECT_EQ(StackDownsample(Var(RandomMatrix(32, 3, rng)))->rows(), 2);
  EXPECT_EQ(StackDownsample(Var(RandomMatrix(33, 3, rng)))->rows(), 3);
  EXPECT_EQ(StackDownsample(Var(RandomMatrix(33, 3, rng)))->cols(), 48);
}

TEST(StackDownsampleTest, SixteenFramesConcatenate) {
  Rng rng(12);
  Tensor x = RandomMatrix(16, 3, rng);
  Var y = StackDownsample(Var(x));
  ASSERT_EQ(y->rows(), 1);
  for (int t = 0; t < 16; ++t)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(y->at(0, t * 3 + c), x.at(t, c));
}

TEST(StackDownsampleTest, TailIsZeroPadded) {
  Rng rng(13);
  Tensor x = RandomMatrix(33, 2, rng);
  Var y = StackDownsample(Var(x));
  EXPECT_EQ(y->at(2, 0), x.at(32, 0));
  EXPECT_EQ(y->at(2, 1), x.at(32, 1));
  for (int c = 2; c < 32; ++c) EXPECT_EQ(y->at(2, c), 0.0);
  EXPECT_EQ(y->at(1, 0), x.at(16, 0));
}

}  // namespace
}  // namespace simuls2s
