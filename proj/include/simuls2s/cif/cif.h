// include/simuls2s/cif/cif.h

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

#ifndef SIMULS2S_CIF_CIF_H_
#define SIMULS2S_CIF_CIF_H_

#include <optional>
#include <span>
#include <vector>

#include "simuls2s/numerics/nn.h"

namespace simuls2s {

// Continuous integrate-and-fire over encoder frames. The last dimension of a
// frame is the weight logit (alpha = sigmoid of it); the remaining d - 1
// dimensions are the values that are integrated into prompt vectors.

inline constexpr double kCifThreshold = 1.0;
inline constexpr double kCifFinalizeThreshold = 0.5;

struct PromptVector {
  std::vector<double> values;  // width d - 1
  int fire_frame = 0;          // index of the frame that completed it
};

struct CifState {
  double accum = 0.0;
  std::vector<double> carry;  // partial prompt, empty until the first frame
  int frames_consumed = 0;
  bool finalized = false;
};

double CifAlpha(std::span<const double> frame);

// Consumes one frame; returns the prompts it completes (zero, one, or more
// when alpha >= 1 carries the accumulator across several thresholds).
std::vector<PromptVector> CifStep(CifState* state, std::span<const double> frame);

// Same as CifStep with an explicit weight and value vector.
std::vector<PromptVector> CifStepWeighted(CifState* state, double alpha,
                                          std::span<const double> values);

// End of input: emits the residual prompt if at least half a unit of weight
// has accumulated. The state accepts no further frames.
std::optional<PromptVector> CifFinalize(CifState* state);

// Runs CifStep over every row of `frames` and then CifFinalize.
std::vector<PromptVector> CifRunAll(const Tensor& frames, bool finalize);

// Training-side ops on an alpha column [T x 1].

// |sum(alpha) - target_length|.
Var QuantityLoss(const Var& alphas, int target_length);

// alpha * N / sum(alpha); N = 0 gives all zeros.
Var ScaleAlphas(const Var& alphas, int target_length);

// Differentiable integration. Frame t covers [c_{t-1}, c_t) on the cumulative
// weight axis; prompt i collects values with weight equal to the overlap of
// that interval with [i, i + 1). Returns [num_prompts x D] for values
// [T x D].
Var CifIntegrate(const Var& alphas, const Var& values, int num_prompts);

// Splits encoder output [T x d] into (alphas [T x 1], values [T x d-1]).
Var CifAlphas(const Var& encoder_out);
Var CifValues(const Var& encoder_out);

// Dense projection from the prompt width to the LM width.
struct PromptProjector {
  Linear proj;

  PromptProjector() = default;
  PromptProjector(int value_width, int lm_width, Rng& rng);
  Var Forward(const Var& prompts, Tape* tape) { return proj.Forward(prompts, tape); }
  Tensor Project(std::span<const PromptVector> prompts);
  void Collect(std::vector<Parameter*>* params) { proj.Collect(params); }
};

}  // namespace simuls2s

#endif  // SIMULS2S_CIF_CIF_H_
