// include/simuls2s/harness/bundle.h

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

#ifndef SIMULS2S_HARNESS_BUNDLE_H_
#define SIMULS2S_HARNESS_BUNDLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "simuls2s/cif/cif.h"
#include "simuls2s/decoder_lm/decoder_lm.h"
#include "simuls2s/encoder/encoder.h"
#include "simuls2s/harness/config.h"
#include "simuls2s/harness/synthetic.h"
#include "simuls2s/scheduler/scheduler.h"
#include "simuls2s/speech_generator/speech_generator.h"

namespace simuls2s {

struct ModelConfig {
  EncoderConfig encoder;
  LmConfig lm;
  GeneratorConfig generator;
  PromptMode mode = PromptMode::kCif;
  int stack_group = 16;
  std::uint64_t seed = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
  // Sizes that depend on the data come from `task`; the rest from model.*
  // keys with the toy defaults.
  static ModelConfig FromConfig(const KeyValueConfig& c, const SyntheticTaskSpec& task);
};

// Every trainable module of one system. Both prompt front-ends exist; only
// the one named by config.mode is trained and used.
class ModelBundle {
 public:
  explicit ModelBundle(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  std::vector<Parameter*> AllParams();
  // Encoder, active front-end and LM.
  std::vector<Parameter*> Stage1Params();
  // Layer fusion weights and speech generator.
  std::vector<Parameter*> Stage2Params();

  SessionModels Models(const NGramModel* ngram);

  void Save(const std::string& path, const nlohmann::json& extra_meta = {});
  static ModelBundle Load(const std::string& path);

  Encoder encoder;
  PromptProjector cif_proj;
  StackPrompter stack;
  DecoderLm lm;
  LayerFusion fusion;
  SpeechGenerator generator;

 private:
  ModelConfig config_;
};

inline const std::vector<int>& PromptPrefixIds() {
  static const std::vector<int> ids{kPrefixId};
  return ids;
}
inline const std::vector<int>& PromptPostfixIds() {
  static const std::vector<int> ids{kPostfixId, kBosId};
  return ids;
}

}  // namespace simuls2s

#endif  // SIMULS2S_HARNESS_BUNDLE_H_
