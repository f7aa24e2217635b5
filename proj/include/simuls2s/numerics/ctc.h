// include/simuls2s/numerics/ctc.h

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

#ifndef SIMULS2S_NUMERICS_CTC_H_
#define SIMULS2S_NUMERICS_CTC_H_

#include <span>

#include "simuls2s/numerics/autograd.h"

namespace simuls2s {

// Blank occupies class 0 of every CTC distribution in this library.
inline constexpr int kBlank = 0;

// log P(target | log_probs), summed over all alignments that collapse to
// `target`. log_probs is [T x (V + 1)] with rows already log-normalised; target
// ids lie in [1, V]. Returns -inf when no alignment of length T exists.
double CtcLogLikelihood(const Tensor& log_probs, std::span<const int> target);

// Minimum number of frames able to emit `target` (repeats need a blank
// between them).
int CtcMinFrames(std::span<const int> target);

// -log P(target | log_probs) with gradient w.r.t. log_probs. An unreachable
// target throws NumericError instead of returning +inf.
Var CtcLoss(const Var& log_probs, std::span<const int> target);

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_CTC_H_
