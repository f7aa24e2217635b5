// include/simuls2s/decoder_lm/decoder_lm.h

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

#ifndef SIMULS2S_DECODER_LM_DECODER_LM_H_
#define SIMULS2S_DECODER_LM_DECODER_LM_H_

#include <span>
#include <vector>

#include "json.hpp"
#include "simuls2s/numerics/nn.h"

namespace simuls2s {

// Fixed text ids shared by every vocabulary in this library.
inline constexpr int kEosId = 0;
inline constexpr int kBosId = 1;

struct LmConfig {
  int vocab_size = 64;
  int d_model = 64;
  int n_layers = 4;
  int n_heads = 4;
  int d_ff = 128;
  int max_positions = 256;

  void Validate() const;
  nlohmann::json ToJson() const;
  static LmConfig FromJson(const nlohmann::json& j);
};

// Full-sequence forward results. hiddens[m] is the output of layer m + 1,
// [n x d_model]; logits come from the final norm and output head.
struct LmForward {
  Var logits;
  std::vector<Var> hiddens;
};

// Result of appending rows to a cache.
struct LmStep {
  std::vector<double> log_probs;  // next-token distribution after the last row
  Tensor hidden_stack;            // [n_layers x d_model] for the last row
};

// Decoding state for one layout: prefix | prompts | postfix | generated. Keys
// and values are kept per layer for every position in that order, with
// contiguous absolute positions.
struct KvCache {
  std::vector<KvRows> layers;
  std::vector<int> prefix_ids;
  std::vector<int> postfix_ids;
  std::vector<int> generated_ids;
  Tensor prompts;  // [n_prompts x d_model], projected prompt embeddings
  bool postfix_written = false;
  bool sealed = false;
  LmStep last_step;  // state after the most recent row

  int num_prompts() const { return prompts.empty() ? 0 : prompts.rows(); }
  int length() const { return layers.empty() ? 0 : layers[0].size(); }
};

// Toy decoder-only causal LM with learned absolute positions.
class DecoderLm {
 public:
  DecoderLm() = default;
  DecoderLm(const LmConfig& config, Rng& rng);

  const LmConfig& config() const { return config_; }

  Var EmbedTokens(std::span<const int> ids, Tape* tape);

  // Causal pass over pre-position-embedding rows [n x d_model] placed at
  // positions 0..n-1.
  LmForward Forward(const Var& rows, Tape* tape);

  // Starts a session cache holding only the prefix.
  KvCache Begin(std::span<const int> prefix_ids, std::span<const int> postfix_ids);

  // Inserts prompts at the end of the prompt slot and recomputes the postfix
  // and generated entries. Returns the state after the last layout row.
  // Throws once the cache is sealed.
  LmStep ExtendPrompt(KvCache* cache, const Tensor& new_prompts);

  // Feeds one generated token.
  LmStep AppendToken(KvCache* cache, int token);

  // Full layout rows (before position embeddings) for scratch passes.
  Tensor LayoutRows(const KvCache& cache);

  void Collect(std::vector<Parameter*>* params);

 private:
  // Runs rows starting at position cache->length() through every layer.
  LmStep Extend(KvCache* cache, const Tensor& rows);

  LmConfig config_;
  Parameter token_embed_;  // [vocab x d_model]
  Parameter pos_embed_;    // [max_positions x d_model]
  std::vector<TransformerLayer> layers_;
  LayerNormLayer final_norm_;
  Linear head_;
};

// Trainable multi-layer fusion: h = sum_m softmax(beta)_m * h^m.
struct LayerFusion {
  Parameter beta;  // [1 x n_layers], zero init (uniform weights)

  LayerFusion() = default;
  explicit LayerFusion(int n_layers);
  std::vector<double> Weights() const;
  // hiddens[m] is [n x d] for layer m.
  Var Fuse(std::span<const Var> hiddens, Tape* tape);
  // hidden_stack is [n_layers x d] for one token; returns [1 x d].
  Tensor FuseStack(const Tensor& hidden_stack) const;
  void Collect(std::vector<Parameter*>* params) { params->push_back(&beta); }
};

}  // namespace simuls2s

#endif  // SIMULS2S_DECODER_LM_DECODER_LM_H_
