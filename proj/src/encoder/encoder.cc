// src/encoder/encoder.cc

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

#include "simuls2s/encoder/encoder.h"

#include "simuls2s/base/error.h"

namespace simuls2s {

void EncoderConfig::Validate() const {
  if (chunk_size_frames < 1) throw UsageError("encoder chunk_size_frames must be >= 1");
  if (n_heads < 1 || d_model % n_heads != 0) {
    throw UsageError("encoder d_model must be divisible by n_heads");
  }
  if (d_model < 2) throw UsageError("encoder d_model must be >= 2 (CIF uses the last dim)");
  if (d_in < 1 || n_layers < 0 || d_ff < 1 || frame_stride_ms < 1) {
    throw UsageError("invalid encoder dimensions");
  }
}

nlohmann::json EncoderConfig::ToJson() const {
  return {{"d_in", d_in},         {"d_model", d_model},
          {"n_layers", n_layers}, {"n_heads", n_heads},
          {"d_ff", d_ff},         {"chunk_size_frames", chunk_size_frames},
          {"frame_stride_ms", frame_stride_ms}};
}

EncoderConfig EncoderConfig::FromJson(const nlohmann::json& j) {
  EncoderConfig c;
  c.d_in = j.at("d_in");
  c.d_model = j.at("d_model");
  c.n_layers = j.at("n_layers");
  c.n_heads = j.at("n_heads");
  c.d_ff = j.at("d_ff");
  c.chunk_size_frames = j.at("chunk_size_frames");
  c.frame_stride_ms = j.at("frame_stride_ms");
  return c;
}

Encoder::Encoder(const EncoderConfig& config, Rng& rng)
    : config_(config),
      input_proj_("encoder.input", config.d_in, config.d_model, rng),
      final_norm_("encoder.final_norm", config.d_model) {
  config_.Validate();
  for (int l = 0; l < config.n_layers; ++l) {
    layers_.emplace_back("encoder.layer" + std::to_string(l), config.d_model, config.n_heads,
                         config.d_ff, rng);
  }
}

Var Encoder::EncodeOffline(const Var& frames, Tape* tape) {
  const int T = frames->rows();
  if (T < 1) throw ShapeError("EncodeOffline: empty input");
  if (frames->cols() != config_.d_in) {
    throw ShapeError("EncodeOffline: expected " + std::to_string(config_.d_in) +
                     " input dims, got " + std::to_string(frames->cols()));
  }
  Var x = Add(input_proj_.Forward(frames, tape),
              Var(SinusoidalPositions(0, T, config_.d_model)));
  const Mask mask = Mask::Chunked(T, config_.chunk_size_frames);
  for (auto& layer : layers_) x = layer.Forward(x, mask, tape);
  return final_norm_.Forward(x, tape);
}

Tensor Encoder::EncodeStream(EncoderState* state, const Tensor& chunk, bool final) {
  if (state->finished) throw ShapeError("EncodeStream: session already received its final chunk");
  const int c = chunk.rows();
  if (chunk.cols() != config_.d_in) throw ShapeError("EncodeStream: wrong input width");
  if (c < 1) throw ShapeError("EncodeStream: empty chunk");
  if (c > config_.chunk_size_frames || (c < config_.chunk_size_frames && !final)) {
    throw ShapeError("EncodeStream: chunk of " + std::to_string(c) + " frames, expected " +
                     std::to_string(config_.chunk_size_frames) +
                     (final ? " or fewer" : " (partial chunks need the final flag)"));
  }
  if (state->keys_values.empty()) state->keys_values.resize(layers_.size());

  const int past = state->frames_seen;
  Var x = Add(input_proj_.Forward(Var(chunk), nullptr),
              Var(SinusoidalPositions(past, c, config_.d_model)));
  // Every past frame lies in an earlier chunk and the new rows form one
  // chunk, so the chunk mask reduces to all-true here.
  const Mask mask = AppendMask(past, c, false);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = layers_[l].ForwardIncremental(x, &state->keys_values[l], mask, nullptr);
  }
  x = final_norm_.Forward(x, nullptr);

  state->cached_frames.insert(state->cached_frames.end(), chunk.data().begin(), chunk.data().end());
  state->frames_seen += c;
  if (c == config_.chunk_size_frames) ++state->completed_chunks;
  state->finished = final;
  return x.value();
}

void Encoder::Collect(std::vector<Parameter*>* params) {
  input_proj_.Collect(params);
  for (auto& layer : layers_) layer.Collect(params);
  final_norm_.Collect(params);
}

Var StackDownsample(const Var& frames, int group) {
  S2S_CHECK(group >= 1, "stack group must be >= 1");
  const int T = frames->rows(), d = frames->cols();
  if (T < 1) throw ShapeError("StackDownsample: empty input");
  const int groups = (T + group - 1) / group;
  const int padded = groups * group;
  Var x = frames;
  if (padded != T) {
    const Var parts[] = {frames, Var(Tensor::Zeros({padded - T, d}))};
    x = ConcatRows(parts);
  }
  return Reshape(x, groups, group * d);
}

StackPrompter::StackPrompter(int d_model, int lm_width, int group_size, Rng& rng)
    : group(group_size), proj("stack.proj", group_size * d_model, lm_width, rng) {}

Var StackPrompter::Forward(const Var& encoder_frames, Tape* tape) {
  return proj.Forward(StackDownsample(encoder_frames, group), tape);
}

}  // namespace simuls2s
