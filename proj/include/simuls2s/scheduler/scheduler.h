// include/simuls2s/scheduler/scheduler.h

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

#ifndef SIMULS2S_SCHEDULER_SCHEDULER_H_
#define SIMULS2S_SCHEDULER_SCHEDULER_H_

#include <string>
#include <vector>

#include "simuls2s/cif/cif.h"
#include "simuls2s/decoder_lm/decoder_lm.h"
#include "simuls2s/encoder/encoder.h"
#include "simuls2s/ngram/ngram.h"
#include "simuls2s/scheduler/session_log.h"
#include "simuls2s/speech_generator/speech_generator.h"

namespace simuls2s {

enum class PromptMode { kCif, kStack16 };

const char* PromptModeName(PromptMode mode);
PromptMode ParsePromptMode(const std::string& name);

// Non-owning views of a trained bundle. `stack` is only needed in stack16
// mode, `cif_proj` only in cif mode; `ngram` may be null (no fusion).
struct SessionModels {
  Encoder* encoder = nullptr;
  PromptProjector* cif_proj = nullptr;
  StackPrompter* stack = nullptr;
  DecoderLm* lm = nullptr;
  LayerFusion* fusion = nullptr;
  SpeechGenerator* generator = nullptr;
  const NGramModel* ngram = nullptr;
  std::vector<int> prefix_ids;
  std::vector<int> postfix_ids;
};

struct SessionConfig {
  int k = 5;
  int chunk_size_frames = 32;
  double l_max_ratio = 0.15;
  PromptMode mode = PromptMode::kCif;
  int lm_beam = 5;
  int ctc_beam = 10;
  double lm_weight = 0.5;
  bool greedy_units = false;
  bool record_wall_clock = false;

  void Validate() const;
};

// Gate bookkeeping for one chunk.
struct ChunkTrace {
  int chunk = 0;
  bool final = false;
  int prompts = 0;     // L_p after the chunk
  int prev = 0;        // L_prev, tokens committed before the chunk
  int budget = 0;      // L_gen (L_max at Final)
  int generated = 0;   // tokens actually committed in this chunk
  bool eos = false;
};

struct SessionResult {
  SessionLog log;
  std::vector<int> text;   // committed text tokens, EOS excluded
  std::vector<int> units;  // committed speech units
  std::vector<double> waveform;
  std::vector<ChunkTrace> trace;
  int encoder_frames = 0;
  double source_ms = 0.0;
};

// L_p - L_prev - k + 1.
int WaitKGenLength(int prompts, int prev_generated, int k);

// ceil(ratio * encoder_frames).
int TailLength(double ratio, int encoder_frames);

// Simultaneous decoding of source frames [T x d_in], read chunk by chunk.
SessionResult RunSession(const Tensor& frames, const SessionModels& models,
                         const SessionConfig& config);

// Whole-utterance decoding: all prompts are inserted at once after the last
// chunk has been read; output follows the same tail generation as Final.
SessionResult RunOffline(const Tensor& frames, const SessionModels& models,
                         const SessionConfig& config);

}  // namespace simuls2s

#endif  // SIMULS2S_SCHEDULER_SCHEDULER_H_
