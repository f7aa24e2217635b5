// tests/scheduler_checks.h

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

#ifndef SIMULS2S_TESTS_SCHEDULER_CHECKS_H_
#define SIMULS2S_TESTS_SCHEDULER_CHECKS_H_

#include <algorithm>
#include <memory>
#include <random>
#include <string>

#include "simuls2s/scheduler/scheduler.h"
#include "simuls2s/vocoder/vocoder.h"

namespace simuls2s::testing {

inline constexpr int kUnits = 4;

// Untrained toy bundle; small enough for thousands of sessions.
struct TinyBundle {
  Encoder encoder;
  PromptProjector cif_proj;
  StackPrompter stack;
  DecoderLm lm;
  LayerFusion fusion;
  SpeechGenerator generator;
  NGramModel ngram;

  explicit TinyBundle(std::uint64_t seed) {
    Rng rng(seed);
    EncoderConfig ec;
    ec.d_in = 4;
    ec.d_model = 8;
    ec.n_layers = 1;
    ec.n_heads = 2;
    ec.d_ff = 16;
    ec.chunk_size_frames = 4;
    encoder = Encoder(ec, rng);
    cif_proj = PromptProjector(ec.d_model - 1, 8, rng);
    stack = StackPrompter(ec.d_model, 8, 4, rng);
    LmConfig lc;
    lc.vocab_size = 10;
    lc.d_model = 8;
    lc.n_layers = 2;
    lc.n_heads = 2;
    lc.d_ff = 16;
    lm = DecoderLm(lc, rng);
    fusion = LayerFusion(lc.n_layers);
    GeneratorConfig gc;
    gc.upsample = 3;
    gc.n_layers = 1;
    gc.d_model = 8;
    gc.n_heads = 2;
    gc.d_ff = 16;
    gc.unit_vocab = kUnits;
    gc.d_input = 8;
    generator = SpeechGenerator(gc, rng);
    std::vector<std::vector<int>> corpus;
    std::uniform_int_distribution<int> u(1, kUnits);
    for (int s = 0; s < 20; ++s) {
      std::vector<int> sent(1 + s % 7);
      for (int& x : sent) x = u(rng);
      corpus.push_back(sent);
    }
    ngram = NGramModel::Train(corpus, kUnits, 3);
  }

  SessionModels Models(bool with_ngram = true) {
    SessionModels m;
    m.encoder = &encoder;
    m.cif_proj = &cif_proj;
    m.stack = &stack;
    m.lm = &lm;
    m.fusion = &fusion;
    m.generator = &generator;
    m.ngram = with_ngram ? &ngram : nullptr;
    m.prefix_ids = {2, 3};
    m.postfix_ids = {4, kBosId};
    return m;
  }
};

inline Tensor RandomFrames(int t, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(t) * 4);
  for (double& x : d) x = n(rng);
  return Tensor::Matrix(t, 4, std::move(d));
}

inline SessionConfig BaseConfig(int k) {
  SessionConfig c;
  c.k = k;
  c.chunk_size_frames = 4;
  c.lm_beam = 2;
  c.ctc_beam = 3;
  return c;
}

// Returns a description of the first broken session invariant, or "".
inline std::string CheckSession(const SessionResult& r, const SessionConfig& c) {
  int total = 0;
  for (const ChunkTrace& tr : r.trace) {
    total += tr.generated;
    if (tr.final) continue;
    if (total > std::max(0, tr.prompts - c.k + 1)) return "wait-k gate";
    if (tr.generated > std::max(0, tr.budget)) return "budget";
    if (tr.budget != WaitKGenLength(tr.prompts, tr.prev, c.k)) return "L_gen formula";
  }
  if (r.trace.back().budget != TailLength(c.l_max_ratio, r.encoder_frames)) return "L_max";
  std::vector<int> text, units;
  double last_read = -1, prev_t = 0;
  int index = 0;
  std::size_t samples = 0;
  for (const auto& e : r.log.events) {
    if (e.t_ms < prev_t) return "time order";
    prev_t = e.t_ms;
    if (e.kind == EventKind::kReadChunk) {
      last_read = e.t_ms;
      continue;
    }
    if (e.t_ms != last_read) return "write time";
    if (e.kind == EventKind::kTextToken) {
      if (e.payload.at("index") != index++) return "text index";
      text.push_back(e.payload.at("token"));
    } else if (e.kind == EventKind::kSpeechTokens) {
      for (int u : e.payload.at("tokens")) units.push_back(u);
    } else {
      samples += e.payload.at("samples").get<std::size_t>();
      if (e.payload.at("duration_ms").get<double>() != e.payload.at("tokens").get<int>() * 20.0)
        return "segment duration";
    }
  }
  if (text != r.text) return "text log";
  if (units != r.units) return "unit log";
  if (samples != r.waveform.size()) return "sample count";
  if (Synthesize(r.units).samples != r.waveform) return "waveform";
  for (int u : r.units)
    if (u < 1 || u > kUnits) return "unit range";
  return "";
}

}  // namespace simuls2s::testing

#endif  // SIMULS2S_TESTS_SCHEDULER_CHECKS_H_
