// include/simuls2s/numerics/nn.h

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

#ifndef SIMULS2S_NUMERICS_NN_H_
#define SIMULS2S_NUMERICS_NN_H_

#include <random>
#include <string>
#include <vector>

#include "simuls2s/numerics/autograd.h"
#include "simuls2s/numerics/ops.h"

namespace simuls2s {

using Rng = std::mt19937_64;

// Glorot-uniform [rows x cols].
Tensor GlorotUniform(int rows, int cols, Rng& rng);
Tensor NormalTensor(int rows, int cols, double stddev, Rng& rng);

// Sinusoidal absolute position table [count x width] starting at `first`.
Tensor SinusoidalPositions(int first, int count, int width);

struct Linear {
  Parameter weight;  // [in x out]
  Parameter bias;    // [1 x out]

  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng);
  int in() const { return weight.value.rows(); }
  int out() const { return weight.value.cols(); }
  Var Forward(const Var& x, Tape* tape);
  void Collect(std::vector<Parameter*>* params);
};

struct LayerNormLayer {
  Parameter gain;
  Parameter bias;

  LayerNormLayer() = default;
  LayerNormLayer(const std::string& name, int width);
  Var Forward(const Var& x, Tape* tape);
  void Collect(std::vector<Parameter*>* params);
};

// Keys and values of the rows a layer has already processed.
struct KvRows {
  Tensor keys;    // [n x d_model]
  Tensor values;  // [n x d_model]
  int size() const { return keys.empty() ? 0 : keys.rows(); }
};

// Pre-norm transformer block: x + MHA(LN(x)), then x + FFN(LN(x)).
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(const std::string& name, int d_model, int n_heads, int d_ff, Rng& rng);

  // Full-sequence pass; mask is [T x T].
  Var Forward(const Var& x, const Mask& mask, Tape* tape);

  // Processes `x_new` rows that come after the rows recorded in `cache`.
  // `mask` is [n_new x (cache.size() + n_new)]. The new keys/values are
  // appended to `cache`.
  Var ForwardIncremental(const Var& x_new, KvRows* cache, const Mask& mask, Tape* tape);

  void Collect(std::vector<Parameter*>* params);
  int d_model() const { return d_model_; }

 private:
  Var Attend(const Var& normed_q_rows, const Var& keys, const Var& values, const Mask& mask,
             Tape* tape);
  Var FeedForward(const Var& x, Tape* tape);

  int d_model_ = 0;
  int n_heads_ = 0;
  LayerNormLayer ln_attn_, ln_ff_;
  Linear wq_, wk_, wv_, wo_, ff_in_, ff_out_;
};

// Mask for `n_new` rows appended after `n_past` rows. Every new row sees all
// past rows; among the new rows it sees either all of them or, when
// `causal_within_new` is set, only itself and earlier ones.
Mask AppendMask(int n_past, int n_new, bool causal_within_new);

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_NN_H_
