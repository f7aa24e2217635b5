// src/numerics/nn.cc

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

#include "simuls2s/numerics/nn.h"

#include <cmath>

#include "simuls2s/base/error.h"

namespace simuls2s {

Tensor GlorotUniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> d(static_cast<std::size_t>(rows) * cols);
  for (double& v : d) v = dist(rng);
  return Tensor::Matrix(rows, cols, std::move(d));
}

Tensor NormalTensor(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> d(static_cast<std::size_t>(rows) * cols);
  for (double& v : d) v = dist(rng);
  return Tensor::Matrix(rows, cols, std::move(d));
}

Tensor SinusoidalPositions(int first, int count, int width) {
  std::vector<double> d(static_cast<std::size_t>(count) * width);
  for (int p = 0; p < count; ++p) {
    const double pos = first + p;
    for (int i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / width);
      d[static_cast<std::size_t>(p) * width + i] = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return Tensor::Matrix(count, width, std::move(d));
}

Linear::Linear(const std::string& name, int in, int out, Rng& rng)
    : weight(name + ".weight", GlorotUniform(in, out, rng)),
      bias(name + ".bias", Tensor::Zeros({1, out})) {}

Var Linear::Forward(const Var& x, Tape* tape) {
  return AddBias(MatMul(x, Use(weight, tape)), Use(bias, tape));
}

void Linear::Collect(std::vector<Parameter*>* params) {
  params->push_back(&weight);
  params->push_back(&bias);
}

LayerNormLayer::LayerNormLayer(const std::string& name, int width)
    : gain(name + ".gain", Tensor::Filled({1, width}, 1.0)),
      bias(name + ".bias", Tensor::Zeros({1, width})) {}

Var LayerNormLayer::Forward(const Var& x, Tape* tape) {
  return LayerNorm(x, Use(gain, tape), Use(bias, tape));
}

void LayerNormLayer::Collect(std::vector<Parameter*>* params) {
  params->push_back(&gain);
  params->push_back(&bias);
}

TransformerLayer::TransformerLayer(const std::string& name, int d_model, int n_heads, int d_ff,
                                   Rng& rng)
    : d_model_(d_model),
      n_heads_(n_heads),
      ln_attn_(name + ".ln_attn", d_model),
      ln_ff_(name + ".ln_ff", d_model),
      wq_(name + ".wq", d_model, d_model, rng),
      wk_(name + ".wk", d_model, d_model, rng),
      wv_(name + ".wv", d_model, d_model, rng),
      wo_(name + ".wo", d_model, d_model, rng),
      ff_in_(name + ".ff_in", d_model, d_ff, rng),
      ff_out_(name + ".ff_out", d_ff, d_model, rng) {
  S2S_CHECK(n_heads >= 1 && d_model % n_heads == 0, "d_model must be divisible by n_heads");
}

Var TransformerLayer::Attend(const Var& normed, const Var& keys, const Var& values,
                             const Mask& mask, Tape* tape) {
  const Var q = wq_.Forward(normed, tape);
  const int dh = d_model_ / n_heads_;
  std::vector<Var> heads;
  heads.reserve(n_heads_);
  for (int h = 0; h < n_heads_; ++h) {
    heads.push_back(MaskedAttention(SliceCols(q, h * dh, (h + 1) * dh),
                                    SliceCols(keys, h * dh, (h + 1) * dh),
                                    SliceCols(values, h * dh, (h + 1) * dh), mask));
  }
  return wo_.Forward(n_heads_ == 1 ? heads[0] : ConcatCols(heads), tape);
}

Var TransformerLayer::FeedForward(const Var& x, Tape* tape) {
  return Add(x, ff_out_.Forward(Relu(ff_in_.Forward(ln_ff_.Forward(x, tape), tape)), tape));
}

Var TransformerLayer::Forward(const Var& x, const Mask& mask, Tape* tape) {
  const Var normed = ln_attn_.Forward(x, tape);
  const Var k = wk_.Forward(normed, tape);
  const Var v = wv_.Forward(normed, tape);
  return FeedForward(Add(x, Attend(normed, k, v, mask, tape)), tape);
}

Var TransformerLayer::ForwardIncremental(const Var& x_new, KvRows* cache, const Mask& mask,
                                         Tape* tape) {
  const Var normed = ln_attn_.Forward(x_new, tape);
  const Var k_new = wk_.Forward(normed, tape);
  const Var v_new = wv_.Forward(normed, tape);
  Var keys = k_new, values = v_new;
  if (cache->size() > 0) {
    const Var kp[] = {Var(cache->keys), k_new};
    const Var vp[] = {Var(cache->values), v_new};
    keys = ConcatRows(kp);
    values = ConcatRows(vp);
  }
  cache->keys = keys.value();
  cache->values = values.value();
  return FeedForward(Add(x_new, Attend(normed, keys, values, mask, tape)), tape);
}

void TransformerLayer::Collect(std::vector<Parameter*>* params) {
  for (LayerNormLayer* ln : {&ln_attn_, &ln_ff_}) ln->Collect(params);
  for (Linear* l : {&wq_, &wk_, &wv_, &wo_, &ff_in_, &ff_out_}) l->Collect(params);
}

Mask AppendMask(int n_past, int n_new, bool causal_within_new) {
  Mask m(n_new, n_past + n_new, true);
  if (causal_within_new) {
    for (int i = 0; i < n_new; ++i)
      for (int j = i + 1; j < n_new; ++j) m.Set(i, n_past + j, false);
  }
  return m;
}

}  // namespace simuls2s
