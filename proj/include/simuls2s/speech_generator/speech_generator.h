// include/simuls2s/speech_generator/speech_generator.h

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

#ifndef SIMULS2S_SPEECH_GENERATOR_SPEECH_GENERATOR_H_
#define SIMULS2S_SPEECH_GENERATOR_SPEECH_GENERATOR_H_

#include <vector>

#include "json.hpp"
#include "simuls2s/numerics/nn.h"

namespace simuls2s {

struct GeneratorConfig {
  int upsample = 25;    // U: CTC frames per LM token
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 128;
  int unit_vocab = 32;  // V_s; the CTC head has V_s + 1 classes, blank = 0
  int d_input = 64;     // width of the fused LM hidden state

  void Validate() const;
  nlohmann::json ToJson() const;
  static GeneratorConfig FromJson(const nlohmann::json& j);
};

struct GeneratorState {
  std::vector<KvRows> layers;
  int tokens_seen = 0;
};

// Causal transformer over upsampled fused hidden states. Token i owns CTC
// frames [i * U, (i + 1) * U); every frame attends to itself and earlier
// frames only.
class SpeechGenerator {
 public:
  SpeechGenerator() = default;
  SpeechGenerator(const GeneratorConfig& config, Rng& rng);

  const GeneratorConfig& config() const { return config_; }

  // fused: [N x d_input] -> log-probs [N * U x (V_s + 1)].
  Var Forward(const Var& fused, Tape* tape);

  // One token's window of log-probs [U x (V_s + 1)].
  Tensor Window(GeneratorState* state, const Tensor& fused_row);

  void Collect(std::vector<Parameter*>* params);

 private:
  Var FrameInputs(const Var& fused, int first_token, Tape* tape);
  Var Head(const Var& x, Tape* tape);

  GeneratorConfig config_;
  Linear in_proj_;
  Parameter offset_embed_;  // [U x d_model], position within a window
  std::vector<TransformerLayer> layers_;
  LayerNormLayer final_norm_;
  Linear head_;
};

}  // namespace simuls2s

#endif  // SIMULS2S_SPEECH_GENERATOR_SPEECH_GENERATOR_H_
