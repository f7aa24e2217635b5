// include/simuls2s/harness/train.h

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

#ifndef SIMULS2S_HARNESS_TRAIN_H_
#define SIMULS2S_HARNESS_TRAIN_H_

#include <cstdint>
#include <vector>

#include "simuls2s/harness/bundle.h"
#include "simuls2s/harness/config.h"
#include "simuls2s/harness/synthetic.h"

namespace simuls2s {

struct TrainConfig {
  int stage = 1;
  double gamma = 0.05;  // quantity loss weight
  double lr = 2e-3;
  int steps = 2000;
  int batch = 8;
  int warmup = 100;
  double final_lr_ratio = 1.0;  // cosine decay to lr * ratio after warmup
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  int log_every = 100;

  void Validate() const;
  static TrainConfig FromConfig(const KeyValueConfig& c, int stage);
};

struct TrainStep {
  int step;
  double loss;
  double main;      // CE in stage 1, CTC in stage 2
  double quantity;  // |sum(alpha) - N|, stage 1 CIF only
};

struct TrainResult {
  std::vector<TrainStep> history;
  double first_loss = 0.0;  // mean over the first log window
  double last_loss = 0.0;   // mean over the last log window
};

// Losses for one utterance on `tape`; the LM sees the full offline prompt.
struct Stage1Loss {
  Var total;
  Var ce;
  Var quantity;  // untracked zero in stack16 mode
};
Stage1Loss ComputeStage1Loss(ModelBundle& bundle, const Utterance& u, double gamma, Tape* tape);
Var ComputeStage2Loss(ModelBundle& bundle, const Utterance& u, Tape* tape);

// Stage 1: encoder, active front-end and LM on CE + gamma * quantity loss.
TrainResult TrainStage1(ModelBundle& bundle, const std::vector<Utterance>& data,
                        const TrainConfig& config);
// Stage 2: only fusion weights and the generator move, under CTC.
TrainResult TrainStage2(ModelBundle& bundle, const std::vector<Utterance>& data,
                        const TrainConfig& config);

// Teacher-forced next-token accuracy over targets plus EOS.
double TeacherForcedAccuracy(ModelBundle& bundle, const std::vector<Utterance>& data);
// Mean |sum(alpha) - N| / N with unscaled weights.
double MeanQuantityGap(ModelBundle& bundle, const std::vector<Utterance>& data);
double MeanCtcLoss(ModelBundle& bundle, const std::vector<Utterance>& data);

}  // namespace simuls2s

#endif  // SIMULS2S_HARNESS_TRAIN_H_
