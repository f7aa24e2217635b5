// src/harness/train.cc

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

#include "simuls2s/harness/train.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "simuls2s/base/error.h"
#include "simuls2s/numerics/ctc.h"
#include "simuls2s/numerics/ops.h"
#include "simuls2s/numerics/optim.h"

namespace simuls2s {

void TrainConfig::Validate() const {
  if (stage != 1 && stage != 2) throw UsageError("stage must be 1 or 2");
  if (gamma < 0.0) throw UsageError("gamma must be >= 0");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (steps < 0 || batch < 1 || warmup < 0) throw UsageError("bad step/batch settings");
  if (final_lr_ratio < 0.0 || final_lr_ratio > 1.0) throw UsageError("final_lr_ratio must be in [0, 1]");
}

TrainConfig TrainConfig::FromConfig(const KeyValueConfig& c, int stage) {
  const std::string s = "train" + std::to_string(stage) + ".";
  TrainConfig t;
  t.stage = stage;
  t.gamma = c.GetDouble(s + "gamma", t.gamma);
  t.lr = c.GetDouble(s + "lr", t.lr);
  t.steps = c.GetInt(s + "steps", t.steps);
  t.batch = c.GetInt(s + "batch", t.batch);
  t.warmup = c.GetInt(s + "warmup", t.warmup);
  t.final_lr_ratio = c.GetDouble(s + "final_lr_ratio", t.final_lr_ratio);
  t.clip_norm = c.GetDouble(s + "clip_norm", t.clip_norm);
  t.seed = static_cast<std::uint64_t>(c.GetInt(s + "seed", static_cast<int>(t.seed)));
  t.log_every = c.GetInt(s + "log_every", t.log_every);
  t.Validate();
  return t;
}

namespace {

struct Layout {
  Var rows;
  int answer_row;  // row whose output predicts the first target token
};

// prefix | prompts | postfix | targets, before position embeddings.
Layout BuildLayout(ModelBundle& b, const Var& prompts, const std::vector<int>& target,
                   Tape* tape) {
  const auto& prefix = PromptPrefixIds();
  const auto& postfix = PromptPostfixIds();
  std::vector<Var> parts{b.lm.EmbedTokens(prefix, tape), prompts,
                         b.lm.EmbedTokens(postfix, tape)};
  if (!target.empty()) parts.push_back(b.lm.EmbedTokens(target, tape));
  const int answer =
      static_cast<int>(prefix.size()) + prompts->rows() + static_cast<int>(postfix.size()) - 1;
  return {ConcatRows(parts), answer};
}

struct Prompts {
  Var prompts;
  Var alphas;  // CIF only
};

Prompts TrainingPrompts(ModelBundle& b, const Utterance& u, Tape* tape) {
  const Var enc = b.encoder.EncodeOffline(tape ? tape->Leaf(u.frames) : Var(u.frames), tape);
  const int n = static_cast<int>(u.target.size());
  if (b.config().mode == PromptMode::kStack16) return {b.stack.Forward(enc, tape), Var()};
  const Var alphas = CifAlphas(enc);
  const Var integrated = CifIntegrate(ScaleAlphas(alphas, n), CifValues(enc), n);
  return {b.cif_proj.Forward(integrated, tape), alphas};
}

std::vector<int> WithEos(const std::vector<int>& target) {
  std::vector<int> y = target;
  y.push_back(kEosId);
  return y;
}

double LrFactor(const TrainConfig& c, int step) {
  if (step <= c.warmup) return static_cast<double>(step) / c.warmup;
  const double span = std::max(1, c.steps - c.warmup);
  const double progress = std::min(1.0, (step - c.warmup) / span);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return c.final_lr_ratio + (1.0 - c.final_lr_ratio) * cosine;
}

template <typename LossFn>
TrainResult RunTraining(const std::vector<Parameter*>& params, const std::vector<Utterance>& data,
                        const TrainConfig& config, const char* tag, LossFn loss_fn) {
  config.Validate();
  if (data.empty()) throw DataError("training set is empty");
  AdamOptions opts;
  opts.lr = config.lr;
  opts.clip_norm = config.clip_norm;
  Adam adam(params, opts);
  for (Parameter* p : params) p->ZeroGrad();
  std::seed_seq seq{static_cast<std::uint64_t>(config.stage), config.seed};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);

  TrainResult result;
  double window = 0.0;
  int in_window = 0;
  for (int step = 1; step <= config.steps; ++step) {
    adam.set_lr(config.lr * LrFactor(config, step));
    TrainStep rec{step, 0.0, 0.0, 0.0};
    for (int i = 0; i < config.batch; ++i) {
      Tape tape;
      const auto [loss, main, quantity] = loss_fn(data[pick(rng)], &tape);
      tape.Backward(Scale(loss, 1.0 / config.batch));
      rec.loss += loss->item() / config.batch;
      rec.main += main / config.batch;
      rec.quantity += quantity / config.batch;
    }
    adam.Step();
    result.history.push_back(rec);
    window += rec.loss;
    ++in_window;
    const bool boundary = config.log_every > 0 && step % config.log_every == 0;
    if (boundary || step == config.steps) {
      const double mean = window / in_window;
      if (result.first_loss == 0.0) result.first_loss = mean;
      result.last_loss = mean;
      if (config.log_every > 0) {
        std::cerr << tag << " step " << step << " loss " << mean << "\n";
      }
      window = 0.0;
      in_window = 0;
    }
  }
  return result;
}

struct LossParts {
  Var loss;
  double main;
  double quantity;
};

}  // namespace

Stage1Loss ComputeStage1Loss(ModelBundle& b, const Utterance& u, double gamma, Tape* tape) {
  if (u.target.empty()) throw DataError("utterance " + u.id + " has no target");
  const Prompts p = TrainingPrompts(b, u, tape);
  const Layout layout = BuildLayout(b, p.prompts, u.target, tape);
  const LmForward f = b.lm.Forward(layout.rows, tape);
  const std::vector<int> y = WithEos(u.target);
  const Var logits =
      SliceRows(f.logits, layout.answer_row, layout.answer_row + static_cast<int>(y.size()));
  Stage1Loss out;
  out.ce = CrossEntropy(logits, y);
  if (b.config().mode == PromptMode::kCif) {
    out.quantity = QuantityLoss(p.alphas, static_cast<int>(u.target.size()));
    out.total = gamma > 0.0 ? Add(out.ce, Scale(out.quantity, gamma)) : out.ce;
  } else {
    out.quantity = Var(Tensor::Scalar(0.0));
    out.total = out.ce;
  }
  return out;
}

namespace {

Var FusedTargetStates(ModelBundle& b, const Utterance& u, Tape* tape) {
  const Prompts p = TrainingPrompts(b, u, nullptr);
  const Layout layout = BuildLayout(b, p.prompts, u.target, nullptr);
  const LmForward f = b.lm.Forward(layout.rows, nullptr);
  // Token i's state is read at the row where it is fed to the LM.
  const int first = layout.answer_row + 1;
  const int n = static_cast<int>(u.target.size());
  std::vector<Var> rows;
  for (const Var& h : f.hiddens) rows.push_back(SliceRows(h, first, first + n));
  return b.fusion.Fuse(rows, tape);
}

}  // namespace

Var ComputeStage2Loss(ModelBundle& b, const Utterance& u, Tape* tape) {
  if (u.target.empty() || u.units.empty()) throw DataError("utterance " + u.id + " is empty");
  return CtcLoss(b.generator.Forward(FusedTargetStates(b, u, tape), tape), u.units);
}

TrainResult TrainStage1(ModelBundle& bundle, const std::vector<Utterance>& data,
                        const TrainConfig& config) {
  return RunTraining(bundle.Stage1Params(), data, config, "stage1",
                     [&](const Utterance& u, Tape* tape) {
                       const Stage1Loss l = ComputeStage1Loss(bundle, u, config.gamma, tape);
                       return LossParts{l.total, l.ce->item(), l.quantity->item()};
                     });
}

TrainResult TrainStage2(ModelBundle& bundle, const std::vector<Utterance>& data,
                        const TrainConfig& config) {
  std::vector<Parameter*> frozen = bundle.Stage1Params();
  for (Parameter* p : frozen) p->frozen = true;
  TrainResult r;
  try {
    r = RunTraining(bundle.Stage2Params(), data, config, "stage2",
                    [&](const Utterance& u, Tape* tape) {
                      const Var l = ComputeStage2Loss(bundle, u, tape);
                      return LossParts{l, l->item(), 0.0};
                    });
  } catch (...) {
    for (Parameter* p : frozen) p->frozen = false;
    throw;
  }
  for (Parameter* p : frozen) p->frozen = false;
  return r;
}

double TeacherForcedAccuracy(ModelBundle& b, const std::vector<Utterance>& data) {
  long correct = 0, total = 0;
  for (const Utterance& u : data) {
    const Prompts p = TrainingPrompts(b, u, nullptr);
    const Layout layout = BuildLayout(b, p.prompts, u.target, nullptr);
    const Tensor logits = b.lm.Forward(layout.rows, nullptr).logits.value();
    const std::vector<int> y = WithEos(u.target);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto row = logits.row(layout.answer_row + static_cast<int>(i));
      const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += best == y[i];
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

double MeanQuantityGap(ModelBundle& b, const std::vector<Utterance>& data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const Utterance& u : data) {
    const Tensor a = CifAlphas(b.encoder.EncodeOffline(Var(u.frames), nullptr)).value();
    double s = 0.0;
    for (double x : a.data()) s += x;
    const double n = static_cast<double>(u.target.size());
    sum += std::abs(s - n) / n;
  }
  return sum / static_cast<double>(data.size());
}

double MeanCtcLoss(ModelBundle& b, const std::vector<Utterance>& data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const Utterance& u : data) sum += ComputeStage2Loss(b, u, nullptr)->item();
  return sum / static_cast<double>(data.size());
}

}  // namespace simuls2s
