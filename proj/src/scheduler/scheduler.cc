// src/scheduler/scheduler.cc

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

#include "simuls2s/scheduler/scheduler.h"

#include <chrono>
#include <cmath>
#include <memory>

#include "simuls2s/base/error.h"
#include "simuls2s/decoder_lm/beam_search.h"
#include "simuls2s/numerics/ops.h"
#include "simuls2s/speech_generator/ctc_search.h"
#include "simuls2s/vocoder/vocoder.h"

namespace simuls2s {

const char* PromptModeName(PromptMode mode) {
  return mode == PromptMode::kCif ? "cif" : "stack16";
}

PromptMode ParsePromptMode(const std::string& name) {
  if (name == "cif") return PromptMode::kCif;
  if (name == "stack16") return PromptMode::kStack16;
  throw UsageError("unknown prompt mode '" + name + "'");
}

void SessionConfig::Validate() const {
  if (k < 1) throw UsageError("wait-k requires k >= 1");
  if (chunk_size_frames < 1) throw UsageError("chunk size must be >= 1");
  if (!(l_max_ratio > 0.0)) throw UsageError("l_max_ratio must be positive");
  if (lm_beam < 1 || ctc_beam < 1) throw UsageError("beam sizes must be >= 1");
  if (lm_weight < 0.0) throw UsageError("lm_weight must be >= 0");
}

int WaitKGenLength(int prompts, int prev_generated, int k) {
  return prompts - prev_generated - k + 1;
}

int TailLength(double ratio, int encoder_frames) {
  return static_cast<int>(std::ceil(ratio * encoder_frames));
}

namespace {

void CheckModels(const SessionModels& m, const SessionConfig& config) {
  if (m.encoder == nullptr || m.lm == nullptr || m.fusion == nullptr || m.generator == nullptr) {
    throw UsageError("session models are incomplete");
  }
  const int width = m.lm->config().d_model;
  if (config.mode == PromptMode::kCif) {
    if (m.cif_proj == nullptr) throw UsageError("cif mode needs a prompt projector");
    if (m.cif_proj->proj.out() != width ||
        m.cif_proj->proj.in() != m.encoder->config().d_model - 1) {
      throw DataError("CIF projector does not match the encoder and LM widths");
    }
  } else {
    if (m.stack == nullptr) throw UsageError("stack16 mode needs a stack prompter");
    if (m.stack->proj.out() != width ||
        m.stack->proj.in() != m.stack->group * m.encoder->config().d_model) {
      throw DataError("stack prompter does not match the encoder and LM widths");
    }
  }
  if (m.fusion->beta.value.cols() != m.lm->config().n_layers) {
    throw DataError("layer fusion size does not match the LM depth");
  }
  if (m.generator->config().d_input != width) {
    throw DataError("speech generator input width does not match the LM width");
  }
  if (m.ngram != nullptr && m.ngram->vocab_size() < m.generator->config().unit_vocab) {
    throw DataError("unit n-gram vocabulary is smaller than the generator's");
  }
  for (int id : m.prefix_ids) {
    if (id < 0 || id >= m.lm->config().vocab_size) throw DataError("prefix id out of range");
  }
  for (int id : m.postfix_ids) {
    if (id < 0 || id >= m.lm->config().vocab_size) throw DataError("postfix id out of range");
  }
}

// Turns encoder output rows into projected prompt rows as they arrive.
class PromptStream {
 public:
  PromptStream(const SessionModels& m, PromptMode mode) : m_(m), mode_(mode) {}

  Tensor Push(const Tensor& enc, bool final) {
    if (mode_ == PromptMode::kCif) {
      std::vector<PromptVector> fired;
      for (int t = 0; t < enc.rows(); ++t) {
        for (auto& p : CifStep(&cif_, enc.row(t))) fired.push_back(std::move(p));
      }
      if (final) {
        if (auto p = CifFinalize(&cif_)) fired.push_back(std::move(*p));
      }
      return fired.empty() ? Tensor() : m_.cif_proj->Project(fired);
    }
    const int d = enc.cols();
    pending_.insert(pending_.end(), enc.data().begin(), enc.data().end());
    const int rows = static_cast<int>(pending_.size()) / d;
    const int group = m_.stack->group;
    const int take = final ? rows : rows / group * group;
    if (take == 0) return Tensor();
    std::vector<double> head(pending_.begin(), pending_.begin() + static_cast<long>(take) * d);
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(take) * d);
    return m_.stack->Forward(Var(Tensor::Matrix(take, d, std::move(head))), nullptr).value();
  }

 private:
  const SessionModels& m_;
  PromptMode mode_;
  CifState cif_;
  std::vector<double> pending_;
};

class Emitter {
 public:
  Emitter(const SessionModels& m, const SessionConfig& c, SessionResult* r)
      : m_(m), config_(c), result_(r), start_(std::chrono::steady_clock::now()) {
    if (c.greedy_units) {
      greedy_ = std::make_unique<CtcGreedy>();
    } else {
      search_ = std::make_unique<IncrementalCtcSearch>(
          m.ngram, CtcSearchOptions{c.ctc_beam, c.lm_weight});
    }
  }

  void Read(double t, nlohmann::json payload) {
    now_ = t;
    Log(EventKind::kReadChunk, std::move(payload));
  }

  // Commits text tokens and their speech windows. With `prune` unset the
  // unit search keeps its beam and only Finish emits.
  void Commit(const Hypothesis& h, bool prune) {
    for (std::size_t i = 0; i < h.tokens.size(); ++i) {
      Log(EventKind::kTextToken,
          {{"token", h.tokens[i]}, {"index", static_cast<int>(result_->text.size())}});
      result_->text.push_back(h.tokens[i]);
      const Tensor window =
          m_.generator->Window(&gen_state_, m_.fusion->FuseStack(h.hidden_stacks[i]));
      if (greedy_) {
        Units(greedy_->ProcessWindow(window));
      } else if (prune) {
        Units(search_->ProcessWindow(window, true));
      } else {
        search_->Advance(window);
      }
    }
  }

  void Finish() {
    if (search_) Units(search_->Finish());
  }

 private:
  void Units(const std::vector<int>& units) {
    if (units.empty()) return;
    Log(EventKind::kSpeechTokens, {{"tokens", units}});
    const WaveSegment seg = Synthesize(units);
    Log(EventKind::kWaveformSegment,
        {{"duration_ms", seg.duration_ms()},
         {"tokens", static_cast<int>(units.size())},
         {"samples", static_cast<int>(seg.samples.size())}});
    result_->units.insert(result_->units.end(), units.begin(), units.end());
    result_->waveform.insert(result_->waveform.end(), seg.samples.begin(), seg.samples.end());
  }

  void Log(EventKind kind, nlohmann::json payload) {
    std::optional<std::int64_t> wall;
    if (config_.record_wall_clock) {
      wall = std::chrono::duration_cast<std::chrono::nanoseconds>(
                 std::chrono::steady_clock::now() - start_)
                 .count();
    }
    result_->log.Add(kind, now_, std::move(payload), wall);
  }

  const SessionModels& m_;
  const SessionConfig& config_;
  SessionResult* result_;
  std::chrono::steady_clock::time_point start_;
  double now_ = 0.0;
  GeneratorState gen_state_;
  std::unique_ptr<IncrementalCtcSearch> search_;
  std::unique_ptr<CtcGreedy> greedy_;
};

Tensor Rows(const Tensor& m, int begin, int end) {
  return SliceRows(Var(m), begin, end).value();
}

nlohmann::json ReadPayload(int chunk, int frames, int prompts, int total, bool final) {
  return {{"chunk", chunk},
          {"frames", frames},
          {"prompts", prompts},
          {"total_prompts", total},
          {"final", final}};
}

void CheckFrames(const Tensor& frames, const SessionModels& m) {
  if (frames.empty() || frames.rows() < 1) throw DataError("empty source");
  if (frames.cols() != m.encoder->config().d_in) {
    throw ShapeError("source feature width does not match the encoder");
  }
}

}  // namespace

SessionResult RunSession(const Tensor& frames, const SessionModels& models,
                         const SessionConfig& config) {
  config.Validate();
  CheckModels(models, config);
  CheckFrames(frames, models);
  if (config.chunk_size_frames != models.encoder->config().chunk_size_frames) {
    throw UsageError("session chunk size must equal the encoder chunk size");
  }
  const double frame_ms = models.encoder->config().frame_stride_ms;
  const int total = frames.rows();
  const int chunk = config.chunk_size_frames;
  const int n_chunks = (total + chunk - 1) / chunk;

  SessionResult result;
  result.encoder_frames = total;
  result.source_ms = total * frame_ms;
  Emitter emit(models, config, &result);
  EncoderState enc_state;
  PromptStream prompts(models, config.mode);
  KvCache cache = models.lm->Begin(models.prefix_ids, models.postfix_ids);

  for (int c = 0; c < n_chunks; ++c) {
    const bool final = c + 1 == n_chunks;
    const int begin = c * chunk, end = std::min(total, begin + chunk);
    const Tensor enc = models.encoder->EncodeStream(&enc_state, Rows(frames, begin, end), final);
    const Tensor fresh = prompts.Push(enc, final);
    const int added = fresh.empty() ? 0 : fresh.rows();
    if (added > 0 || final) models.lm->ExtendPrompt(&cache, fresh);
    emit.Read(end * frame_ms, ReadPayload(c, end - begin, added, cache.num_prompts(), final));

    ChunkTrace tr;
    tr.chunk = c;
    tr.final = final;
    tr.prompts = cache.num_prompts();
    tr.prev = static_cast<int>(result.text.size());
    if (!final) {
      tr.budget = WaitKGenLength(tr.prompts, tr.prev, config.k);
      if (tr.budget > 0) {
        Hypothesis h = GenerateConstrained(*models.lm, cache, tr.budget, config.lm_beam);
        emit.Commit(h, true);
        tr.generated = static_cast<int>(h.tokens.size());
        tr.eos = h.finished;
        cache = std::move(h.cache);
      }
    } else {
      cache.sealed = true;
      tr.budget = TailLength(config.l_max_ratio, result.encoder_frames);
      Hypothesis h = TailGenerate(*models.lm, cache, tr.budget, config.lm_beam);
      emit.Commit(h, false);
      emit.Finish();
      tr.generated = static_cast<int>(h.tokens.size());
      tr.eos = h.finished;
    }
    result.trace.push_back(tr);
  }
  return result;
}

SessionResult RunOffline(const Tensor& frames, const SessionModels& models,
                         const SessionConfig& config) {
  config.Validate();
  CheckModels(models, config);
  CheckFrames(frames, models);
  const double frame_ms = models.encoder->config().frame_stride_ms;
  const int total = frames.rows();
  const int chunk = config.chunk_size_frames;
  const int n_chunks = (total + chunk - 1) / chunk;

  SessionResult result;
  result.encoder_frames = total;
  result.source_ms = total * frame_ms;
  Emitter emit(models, config, &result);
  const Tensor enc = models.encoder->EncodeOffline(Var(frames), nullptr).value();
  PromptStream prompts(models, config.mode);
  const Tensor all = prompts.Push(enc, true);
  KvCache cache = models.lm->Begin(models.prefix_ids, models.postfix_ids);
  models.lm->ExtendPrompt(&cache, all);
  cache.sealed = true;
  for (int c = 0; c < n_chunks; ++c) {
    const bool final = c + 1 == n_chunks;
    const int end = std::min(total, (c + 1) * chunk);
    emit.Read(end * frame_ms, ReadPayload(c, end - c * chunk, final ? cache.num_prompts() : 0,
                                          final ? cache.num_prompts() : 0, final));
  }
  ChunkTrace tr;
  tr.chunk = n_chunks - 1;
  tr.final = true;
  tr.prompts = cache.num_prompts();
  tr.budget = TailLength(config.l_max_ratio, result.encoder_frames);
  Hypothesis h = TailGenerate(*models.lm, cache, tr.budget, config.lm_beam);
  emit.Commit(h, false);
  emit.Finish();
  tr.generated = static_cast<int>(h.tokens.size());
  tr.eos = h.finished;
  result.trace.push_back(tr);
  return result;
}

}  // namespace simuls2s
