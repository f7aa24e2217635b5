// include/simuls2s/decoder_lm/beam_search.h

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

#ifndef SIMULS2S_DECODER_LM_BEAM_SEARCH_H_
#define SIMULS2S_DECODER_LM_BEAM_SEARCH_H_

#include <vector>

#include "simuls2s/decoder_lm/decoder_lm.h"

namespace simuls2s {

struct Hypothesis {
  KvCache cache;                     // includes the hypothesis tokens
  std::vector<int> tokens;           // tokens added by this search, EOS excluded
  std::vector<Tensor> hidden_stacks; // one per token
  double score = 0.0;                // sum of token log-probabilities
  bool finished = false;             // ended with EOS
};

// Beam search over the text vocabulary for at most `max_steps` tokens,
// starting from `cache` (whose last_step holds the next-token distribution).
// Hypotheses that emit EOS stay in the beam as finished entries. Returns the
// best hypothesis by score; all others are discarded.
Hypothesis BeamSearch(DecoderLm& lm, const KvCache& cache, int max_steps, int beam);

// Length-constrained generation for one scheduler step; l_gen >= 1.
Hypothesis GenerateConstrained(DecoderLm& lm, const KvCache& cache, int l_gen, int beam);

// Unconstrained completion once the whole source has been read: runs until
// EOS or l_max tokens.
Hypothesis TailGenerate(DecoderLm& lm, const KvCache& cache, int l_max, int beam);

}  // namespace simuls2s

#endif  // SIMULS2S_DECODER_LM_BEAM_SEARCH_H_
