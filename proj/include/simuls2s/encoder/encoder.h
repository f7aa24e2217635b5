// include/simuls2s/encoder/encoder.h

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

#ifndef SIMULS2S_ENCODER_ENCODER_H_
#define SIMULS2S_ENCODER_ENCODER_H_

#include <vector>

#include "json.hpp"
#include "simuls2s/numerics/nn.h"

namespace simuls2s {

struct EncoderConfig {
  int d_in = 16;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 128;
  int chunk_size_frames = 32;
  int frame_stride_ms = 20;

  void Validate() const;
  nlohmann::json ToJson() const;
  static EncoderConfig FromJson(const nlohmann::json& j);
};

// Per-session streaming state. `keys_values` holds, for each layer, the keys
// and values of every frame processed so far, so each new chunk is encoded
// without revisiting earlier chunks.
struct EncoderState {
  std::vector<double> cached_frames;  // raw input frames, row-major
  int frames_seen = 0;
  int completed_chunks = 0;
  bool finished = false;
  std::vector<KvRows> keys_values;
};

// Chunk-masked transformer encoder. Output frame t attends to every frame in
// chunks 0..chunk(t).
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, Rng& rng);

  const EncoderConfig& config() const { return config_; }

  // frames: [T x d_in], T >= 1. Returns [T x d_model].
  Var EncodeOffline(const Var& frames, Tape* tape);

  // Encodes one chunk of exactly chunk_size_frames rows, or a shorter (>= 1
  // row) chunk when `final` is set. Returns the chunk's output rows.
  Tensor EncodeStream(EncoderState* state, const Tensor& chunk, bool final);

  void Collect(std::vector<Parameter*>* params);

 private:
  EncoderConfig config_;
  Linear input_proj_;
  std::vector<TransformerLayer> layers_;
  LayerNormLayer final_norm_;
};

// Boundary-unaware prompt extraction: consecutive groups of `group` frames
// are concatenated into one [group * d] row; the tail group is zero-padded.
// [T x d] -> [ceil(T / group) x group * d].
Var StackDownsample(const Var& frames, int group = 16);

// Stack-16 baseline prompt front-end: stacking followed by a dense layer to
// the LM width.
struct StackPrompter {
  int group = 16;
  Linear proj;

  StackPrompter() = default;
  StackPrompter(int d_model, int lm_width, int group_size, Rng& rng);
  Var Forward(const Var& encoder_frames, Tape* tape);
  void Collect(std::vector<Parameter*>* params) { proj.Collect(params); }
};

}  // namespace simuls2s

#endif  // SIMULS2S_ENCODER_ENCODER_H_
