// include/simuls2s/harness/synthetic.h

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

#ifndef SIMULS2S_HARNESS_SYNTHETIC_H_
#define SIMULS2S_HARNESS_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "simuls2s/harness/config.h"
#include "simuls2s/numerics/tensor.h"

namespace simuls2s {

// Text ids used by the toy task on top of kEosId = 0 and kBosId = 1.
inline constexpr int kPrefixId = 2;   // instruction token before the prompts
inline constexpr int kPostfixId = 3;  // separator after the prompts
inline constexpr int kFirstTargetId = 4;

struct SyntheticTaskSpec {
  int src_vocab = 24;
  int tgt_vocab = 24;
  int unit_vocab = 32;
  int frames_min = 2;
  int frames_max = 6;
  double swap_prob = 0.25;  // share of source tokens that swap with their successor
  int units_min = 2;
  int units_max = 4;
  double noise_sigma = 0.3;
  int feature_dim = 16;
  int len_min = 6;  // source tokens per utterance
  int len_max = 14;
  std::uint64_t seed = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static SyntheticTaskSpec FromJson(const nlohmann::json& j);
  static SyntheticTaskSpec FromConfig(const KeyValueConfig& c);

  int text_vocab() const { return kFirstTargetId + tgt_vocab; }
};

struct Utterance {
  std::string id;
  std::vector<int> source;  // source token ids in [0, src_vocab)
  std::vector<int> target;  // LM text ids, EOS excluded
  std::vector<int> units;   // speech units in [1, unit_vocab]
  Tensor frames;            // [T x feature_dim]
  std::string frames_path;  // relative to the manifest directory
};

// Per-task tables fixed by the seed: one embedding per source token, the
// source-to-target token map, the swap triggers and one unit expansion per
// target token. Reading left to right, a trigger token and its successor
// trade places in the target and the scan resumes after the pair.
struct SyntheticTask {
  SyntheticTaskSpec spec;
  std::vector<std::vector<double>> embeddings;
  std::vector<int> token_map;
  std::vector<bool> swap_trigger;
  std::vector<std::vector<int>> expansions;

  explicit SyntheticTask(const SyntheticTaskSpec& spec);

  // Utterance `index` of `split`; independent of every other utterance.
  Utterance Make(const std::string& split, int index) const;
};

std::vector<Utterance> GenerateDataset(const SyntheticTaskSpec& spec, const std::string& split,
                                       int n_utterances);

// Writes <dir>/manifest.jsonl (id, frames, source, target, units per line),
// the frame files under <dir>/feats/ and <dir>/task.json.
void WriteDataset(const std::string& dir, const std::vector<Utterance>& data,
                  const SyntheticTaskSpec& spec);
std::vector<Utterance> ReadDataset(const std::string& dir);
SyntheticTaskSpec ReadTaskSpec(const std::string& dir);

// Raw frame file: "S2SF", int32 rows, int32 cols, little-endian doubles.
void WriteFrames(const std::string& path, const Tensor& frames);
Tensor ReadFrames(const std::string& path);

}  // namespace simuls2s

#endif  // SIMULS2S_HARNESS_SYNTHETIC_H_
