// src/decoder_lm/decoder_lm.cc

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

#include "simuls2s/decoder_lm/decoder_lm.h"

#include <cmath>
#include <numeric>

#include "simuls2s/base/error.h"

namespace simuls2s {

void LmConfig::Validate() const {
  if (vocab_size < 3) throw UsageError("LM vocab_size must be >= 3");
  if (n_heads < 1 || d_model % n_heads != 0) {
    throw UsageError("LM d_model must be divisible by n_heads");
  }
  if (n_layers < 1 || d_ff < 1 || max_positions < 1) throw UsageError("invalid LM dimensions");
}

nlohmann::json LmConfig::ToJson() const {
  return {{"vocab_size", vocab_size}, {"d_model", d_model}, {"n_layers", n_layers},
          {"n_heads", n_heads},       {"d_ff", d_ff},       {"max_positions", max_positions}};
}

LmConfig LmConfig::FromJson(const nlohmann::json& j) {
  LmConfig c;
  c.vocab_size = j.at("vocab_size");
  c.d_model = j.at("d_model");
  c.n_layers = j.at("n_layers");
  c.n_heads = j.at("n_heads");
  c.d_ff = j.at("d_ff");
  c.max_positions = j.at("max_positions");
  return c;
}

DecoderLm::DecoderLm(const LmConfig& config, Rng& rng)
    : config_(config),
      token_embed_("lm.token_embed", NormalTensor(config.vocab_size, config.d_model, 0.1, rng)),
      pos_embed_("lm.pos_embed", NormalTensor(config.max_positions, config.d_model, 0.02, rng)),
      final_norm_("lm.final_norm", config.d_model),
      head_("lm.head", config.d_model, config.vocab_size, rng) {
  config_.Validate();
  for (int l = 0; l < config.n_layers; ++l) {
    layers_.emplace_back("lm.layer" + std::to_string(l), config.d_model, config.n_heads,
                         config.d_ff, rng);
  }
}

Var DecoderLm::EmbedTokens(std::span<const int> ids, Tape* tape) {
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw DataError("text id " + std::to_string(id) + " outside the LM vocabulary");
    }
  }
  return Embed(Use(token_embed_, tape), ids);
}

LmForward DecoderLm::Forward(const Var& rows, Tape* tape) {
  const int n = rows->rows();
  if (n < 1) throw ShapeError("DecoderLm::Forward: empty sequence");
  if (n > config_.max_positions) throw DataError("sequence longer than LM max_positions");
  std::vector<int> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  Var x = Add(rows, Embed(Use(pos_embed_, tape), positions));
  const Mask mask = Mask::Causal(n);
  LmForward out;
  for (auto& layer : layers_) {
    x = layer.Forward(x, mask, tape);
    out.hiddens.push_back(x);
  }
  out.logits = head_.Forward(final_norm_.Forward(x, tape), tape);
  return out;
}

LmStep DecoderLm::Extend(KvCache* cache, const Tensor& rows) {
  const int past = cache->length();
  const int n = rows.rows();
  if (past + n > config_.max_positions) throw DataError("layout longer than LM max_positions");
  if (cache->layers.empty()) cache->layers.resize(layers_.size());
  std::vector<int> positions(n);
  std::iota(positions.begin(), positions.end(), past);
  Var x = Add(Var(rows), Embed(Var(pos_embed_.value), positions));
  const Mask mask = AppendMask(past, n, true);
  std::vector<double> stack;
  stack.reserve(layers_.size() * config_.d_model);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = layers_[l].ForwardIncremental(x, &cache->layers[l], mask, nullptr);
    auto last = x->row(n - 1);
    stack.insert(stack.end(), last.begin(), last.end());
  }
  Var last_row = SliceRows(x, n - 1, n);
  Var log_probs = LogSoftmax(head_.Forward(final_norm_.Forward(last_row, nullptr), nullptr));
  LmStep step;
  step.log_probs = log_probs->ToVector();
  step.hidden_stack =
      Tensor::Matrix(static_cast<int>(layers_.size()), config_.d_model, std::move(stack));
  cache->last_step = step;
  return step;
}

KvCache DecoderLm::Begin(std::span<const int> prefix_ids, std::span<const int> postfix_ids) {
  KvCache cache;
  cache.layers.resize(layers_.size());
  cache.prefix_ids.assign(prefix_ids.begin(), prefix_ids.end());
  cache.postfix_ids.assign(postfix_ids.begin(), postfix_ids.end());
  if (!prefix_ids.empty()) Extend(&cache, EmbedTokens(prefix_ids, nullptr).value());
  return cache;
}

LmStep DecoderLm::ExtendPrompt(KvCache* cache, const Tensor& new_prompts) {
  if (cache->sealed) throw Error("prompt insertion after Final is not allowed");
  const int added = new_prompts.empty() ? 0 : new_prompts.rows();
  if (added == 0 && cache->postfix_written) return cache->last_step;
  if (added > 0 && new_prompts.cols() != config_.d_model) {
    throw ShapeError("prompt width does not match the LM width");
  }
  const int keep = static_cast<int>(cache->prefix_ids.size()) + cache->num_prompts();
  for (auto& kv : cache->layers) {
    if (kv.size() > keep) {
      kv.keys = SliceRows(Var(kv.keys), 0, keep).value();
      kv.values = SliceRows(Var(kv.values), 0, keep).value();
    }
  }
  std::vector<Var> parts;
  if (added > 0) {
    parts.emplace_back(new_prompts);
    if (cache->num_prompts() == 0) {
      cache->prompts = new_prompts;
    } else {
      const Var both[] = {Var(cache->prompts), Var(new_prompts)};
      cache->prompts = ConcatRows(both).value();
    }
  }
  if (!cache->postfix_ids.empty()) parts.push_back(EmbedTokens(cache->postfix_ids, nullptr));
  if (!cache->generated_ids.empty()) parts.push_back(EmbedTokens(cache->generated_ids, nullptr));
  if (parts.empty()) throw ShapeError("ExtendPrompt: layout would be empty");
  cache->postfix_written = true;
  return Extend(cache, ConcatRows(parts).value());
}

LmStep DecoderLm::AppendToken(KvCache* cache, int token) {
  if (!cache->postfix_written) throw Error("AppendToken before the postfix was written");
  const int ids[] = {token};
  LmStep step = Extend(cache, EmbedTokens(ids, nullptr).value());
  cache->generated_ids.push_back(token);
  return step;
}

Tensor DecoderLm::LayoutRows(const KvCache& cache) {
  std::vector<Var> parts;
  if (!cache.prefix_ids.empty()) parts.push_back(EmbedTokens(cache.prefix_ids, nullptr));
  if (cache.num_prompts() > 0) parts.emplace_back(cache.prompts);
  if (!cache.postfix_ids.empty()) parts.push_back(EmbedTokens(cache.postfix_ids, nullptr));
  if (!cache.generated_ids.empty()) parts.push_back(EmbedTokens(cache.generated_ids, nullptr));
  if (parts.empty()) return Tensor::Zeros({0, config_.d_model});
  return ConcatRows(parts).value();
}

void DecoderLm::Collect(std::vector<Parameter*>* params) {
  params->push_back(&token_embed_);
  params->push_back(&pos_embed_);
  for (auto& layer : layers_) layer.Collect(params);
  final_norm_.Collect(params);
  head_.Collect(params);
}

LayerFusion::LayerFusion(int n_layers) : beta("fusion.beta", Tensor::Zeros({1, n_layers})) {}

std::vector<double> LayerFusion::Weights() const {
  return Softmax(Var(beta.value))->ToVector();
}

Var LayerFusion::Fuse(std::span<const Var> hiddens, Tape* tape) {
  S2S_CHECK(static_cast<int>(hiddens.size()) == beta.value.cols(),
            "fusion expects one hidden tensor per layer");
  const Var w = Softmax(Use(beta, tape));
  Var out = ScaleBy(hiddens[0], Element(w, 0, 0));
  for (std::size_t m = 1; m < hiddens.size(); ++m) {
    out = Add(out, ScaleBy(hiddens[m], Element(w, 0, static_cast<int>(m))));
  }
  return out;
}

Tensor LayerFusion::FuseStack(const Tensor& hidden_stack) const {
  const int m_layers = hidden_stack.rows(), d = hidden_stack.cols();
  S2S_CHECK(m_layers == beta.value.cols(), "hidden stack depth does not match fusion weights");
  const std::vector<double> w = Weights();
  std::vector<double> out(d, 0.0);
  for (int m = 0; m < m_layers; ++m)
    for (int j = 0; j < d; ++j) out[j] += w[m] * hidden_stack.at(m, j);
  return Tensor::Matrix(1, d, std::move(out));
}

}  // namespace simuls2s
