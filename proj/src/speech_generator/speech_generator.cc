// src/speech_generator/speech_generator.cc

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

#include "simuls2s/speech_generator/speech_generator.h"

#include "simuls2s/base/error.h"

namespace simuls2s {

void GeneratorConfig::Validate() const {
  if (upsample < 1) throw UsageError("generator upsample must be >= 1");
  if (n_heads < 1 || d_model % n_heads != 0) {
    throw UsageError("generator d_model must be divisible by n_heads");
  }
  if (unit_vocab < 1 || d_input < 1 || d_ff < 1 || n_layers < 0) {
    throw UsageError("invalid generator dimensions");
  }
}

nlohmann::json GeneratorConfig::ToJson() const {
  return {{"upsample", upsample}, {"n_layers", n_layers},     {"d_model", d_model},
          {"n_heads", n_heads},   {"d_ff", d_ff},             {"unit_vocab", unit_vocab},
          {"d_input", d_input}};
}

GeneratorConfig GeneratorConfig::FromJson(const nlohmann::json& j) {
  GeneratorConfig c;
  c.upsample = j.at("upsample");
  c.n_layers = j.at("n_layers");
  c.d_model = j.at("d_model");
  c.n_heads = j.at("n_heads");
  c.d_ff = j.at("d_ff");
  c.unit_vocab = j.at("unit_vocab");
  c.d_input = j.at("d_input");
  return c;
}

SpeechGenerator::SpeechGenerator(const GeneratorConfig& config, Rng& rng)
    : config_(config),
      in_proj_("gen.in_proj", config.d_input, config.d_model, rng),
      offset_embed_("gen.offset_embed", NormalTensor(config.upsample, config.d_model, 0.1, rng)),
      final_norm_("gen.final_norm", config.d_model),
      head_("gen.head", config.d_model, config.unit_vocab + 1, rng) {
  config_.Validate();
  for (int l = 0; l < config.n_layers; ++l) {
    layers_.emplace_back("gen.layer" + std::to_string(l), config.d_model, config.n_heads,
                         config.d_ff, rng);
  }
}

Var SpeechGenerator::FrameInputs(const Var& fused, int first_token, Tape* tape) {
  if (fused->cols() != config_.d_input) {
    throw ShapeError("generator input width " + std::to_string(fused->cols()) + ", expected " +
                     std::to_string(config_.d_input));
  }
  const int n = fused->rows(), u = config_.upsample;
  std::vector<int> offsets(static_cast<std::size_t>(n) * u);
  for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = static_cast<int>(i % u);
  Var x = RepeatRows(in_proj_.Forward(fused, tape), u);
  x = Add(x, Embed(Use(offset_embed_, tape), offsets));
  return Add(x, Var(SinusoidalPositions(first_token * u, n * u, config_.d_model)));
}

Var SpeechGenerator::Head(const Var& x, Tape* tape) {
  return LogSoftmax(head_.Forward(final_norm_.Forward(x, tape), tape));
}

Var SpeechGenerator::Forward(const Var& fused, Tape* tape) {
  if (fused->rows() < 1) throw ShapeError("SpeechGenerator::Forward: no tokens");
  Var x = FrameInputs(fused, 0, tape);
  const Mask mask = Mask::Causal(x->rows());
  for (auto& layer : layers_) x = layer.Forward(x, mask, tape);
  return Head(x, tape);
}

Tensor SpeechGenerator::Window(GeneratorState* state, const Tensor& fused_row) {
  if (fused_row.rows() != 1) throw ShapeError("Window expects one fused hidden state");
  if (state->layers.empty()) state->layers.resize(layers_.size());
  const int past = state->tokens_seen * config_.upsample;
  Var x = FrameInputs(Var(fused_row), state->tokens_seen, nullptr);
  const Mask mask = AppendMask(past, config_.upsample, true);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = layers_[l].ForwardIncremental(x, &state->layers[l], mask, nullptr);
  }
  ++state->tokens_seen;
  return Head(x, nullptr).value();
}

void SpeechGenerator::Collect(std::vector<Parameter*>* params) {
  in_proj_.Collect(params);
  params->push_back(&offset_embed_);
  for (auto& layer : layers_) layer.Collect(params);
  final_norm_.Collect(params);
  head_.Collect(params);
}

}  // namespace simuls2s
