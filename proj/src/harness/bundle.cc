// src/harness/bundle.cc

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

#include "simuls2s/harness/bundle.h"

#include "simuls2s/base/error.h"
#include "simuls2s/numerics/checkpoint.h"

namespace simuls2s {

void ModelConfig::Validate() const {
  encoder.Validate();
  lm.Validate();
  generator.Validate();
  if (generator.d_input != lm.d_model) throw UsageError("generator d_input must equal LM d_model");
  if (stack_group < 1) throw UsageError("stack_group must be >= 1");
  if (encoder.d_model < 2) throw UsageError("CIF needs an encoder width of at least 2");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"encoder", encoder.ToJson()},
          {"lm", lm.ToJson()},
          {"generator", generator.ToJson()},
          {"mode", PromptModeName(mode)},
          {"stack_group", stack_group},
          {"seed", seed}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder = EncoderConfig::FromJson(j.at("encoder"));
  c.lm = LmConfig::FromJson(j.at("lm"));
  c.generator = GeneratorConfig::FromJson(j.at("generator"));
  c.mode = ParsePromptMode(j.at("mode"));
  c.stack_group = j.at("stack_group");
  c.seed = j.at("seed");
  c.Validate();
  return c;
}

ModelConfig ModelConfig::FromConfig(const KeyValueConfig& c, const SyntheticTaskSpec& task) {
  ModelConfig m;
  m.encoder.d_in = task.feature_dim;
  m.encoder.d_model = c.GetInt("model.enc_d_model", 32);
  m.encoder.n_layers = c.GetInt("model.enc_layers", 2);
  m.encoder.n_heads = c.GetInt("model.enc_heads", 4);
  m.encoder.d_ff = c.GetInt("model.enc_d_ff", 64);
  m.encoder.chunk_size_frames = c.GetInt("model.chunk_size_frames", 8);
  m.lm.vocab_size = task.text_vocab();
  m.lm.d_model = c.GetInt("model.lm_d_model", 32);
  m.lm.n_layers = c.GetInt("model.lm_layers", 2);
  m.lm.n_heads = c.GetInt("model.lm_heads", 4);
  m.lm.d_ff = c.GetInt("model.lm_d_ff", 64);
  m.lm.max_positions = c.GetInt("model.lm_max_positions", 128);
  m.generator.upsample = c.GetInt("model.upsample", 25);
  m.generator.n_layers = c.GetInt("model.gen_layers", 1);
  m.generator.d_model = c.GetInt("model.gen_d_model", 32);
  m.generator.n_heads = c.GetInt("model.gen_heads", 4);
  m.generator.d_ff = c.GetInt("model.gen_d_ff", 64);
  m.generator.unit_vocab = task.unit_vocab;
  m.generator.d_input = m.lm.d_model;
  m.mode = ParsePromptMode(c.GetString("model.mode", "cif"));
  m.stack_group = c.GetInt("model.stack_group", 16);
  m.seed = static_cast<std::uint64_t>(c.GetInt("model.seed", 1));
  m.Validate();
  return m;
}

namespace {

Rng SeededRng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint64_t>(0x5eed), seed};
  return Rng(seq);
}

}  // namespace

ModelBundle::ModelBundle(const ModelConfig& config) : config_(config) {
  config_.Validate();
  Rng rng = SeededRng(config.seed);
  encoder = Encoder(config.encoder, rng);
  cif_proj = PromptProjector(config.encoder.d_model - 1, config.lm.d_model, rng);
  stack = StackPrompter(config.encoder.d_model, config.lm.d_model, config.stack_group, rng);
  lm = DecoderLm(config.lm, rng);
  fusion = LayerFusion(config.lm.n_layers);
  generator = SpeechGenerator(config.generator, rng);
}

std::vector<Parameter*> ModelBundle::Stage1Params() {
  std::vector<Parameter*> p;
  encoder.Collect(&p);
  if (config_.mode == PromptMode::kCif) {
    cif_proj.Collect(&p);
  } else {
    stack.Collect(&p);
  }
  lm.Collect(&p);
  return p;
}

std::vector<Parameter*> ModelBundle::Stage2Params() {
  std::vector<Parameter*> p;
  fusion.Collect(&p);
  generator.Collect(&p);
  return p;
}

std::vector<Parameter*> ModelBundle::AllParams() {
  std::vector<Parameter*> p;
  encoder.Collect(&p);
  cif_proj.Collect(&p);
  stack.Collect(&p);
  lm.Collect(&p);
  fusion.Collect(&p);
  generator.Collect(&p);
  return p;
}

SessionModels ModelBundle::Models(const NGramModel* ngram) {
  SessionModels m;
  m.encoder = &encoder;
  m.cif_proj = &cif_proj;
  m.stack = &stack;
  m.lm = &lm;
  m.fusion = &fusion;
  m.generator = &generator;
  m.ngram = ngram;
  m.prefix_ids = PromptPrefixIds();
  m.postfix_ids = PromptPostfixIds();
  return m;
}

void ModelBundle::Save(const std::string& path, const nlohmann::json& extra_meta) {
  nlohmann::json meta = extra_meta.is_object() ? extra_meta : nlohmann::json::object();
  meta["model"] = config_.ToJson();
  std::vector<const Parameter*> params;
  for (Parameter* p : AllParams()) params.push_back(p);
  SaveCheckpoint(path, params, meta);
}

ModelBundle ModelBundle::Load(const std::string& path) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  if (!ckpt.meta.contains("model")) throw DataError(path + ": checkpoint has no model config");
  ModelBundle b(ModelConfig::FromJson(ckpt.meta.at("model")));
  RestoreParameters(ckpt, b.AllParams());
  return b;
}

}  // namespace simuls2s
