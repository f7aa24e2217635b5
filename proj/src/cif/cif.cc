// src/cif/cif.cc

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

#include "simuls2s/cif/cif.h"

#include <algorithm>
#include <cmath>

#include "simuls2s/base/error.h"

namespace simuls2s {

double CifAlpha(std::span<const double> frame) {
  S2S_CHECK(frame.size() >= 2, "CIF frame needs at least two dims");
  return SigmoidScalar(frame.back());
}

std::vector<PromptVector> CifStep(CifState* state, std::span<const double> frame) {
  return CifStepWeighted(state, CifAlpha(frame), frame.first(frame.size() - 1));
}

std::vector<PromptVector> CifStepWeighted(CifState* state, double alpha,
                                          std::span<const double> values) {
  if (state->finalized) throw ShapeError("CifStep after CifFinalize");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw NumericError("CIF weight must be finite and >= 0");
  if (state->carry.empty()) {
    state->carry.assign(values.size(), 0.0);
  } else if (state->carry.size() != values.size()) {
    throw ShapeError("CifStep: value width changed mid-stream");
  }
  const int t = state->frames_consumed++;
  std::vector<PromptVector> fired;
  double remaining = alpha;
  while (state->accum + remaining >= kCifThreshold) {
    const double used = kCifThreshold - state->accum;
    for (std::size_t j = 0; j < values.size(); ++j) state->carry[j] += used * values[j];
    fired.push_back({state->carry, t});
    std::fill(state->carry.begin(), state->carry.end(), 0.0);
    remaining -= used;
    state->accum = 0.0;
  }
  state->accum += remaining;
  for (std::size_t j = 0; j < values.size(); ++j) state->carry[j] += remaining * values[j];
  return fired;
}

std::optional<PromptVector> CifFinalize(CifState* state) {
  if (state->finalized) throw ShapeError("CifFinalize called twice");
  state->finalized = true;
  if (state->accum >= kCifFinalizeThreshold && !state->carry.empty()) {
    return PromptVector{state->carry, std::max(0, state->frames_consumed - 1)};
  }
  return std::nullopt;
}

std::vector<PromptVector> CifRunAll(const Tensor& frames, bool finalize) {
  CifState state;
  std::vector<PromptVector> out;
  for (int t = 0; t < frames.rows(); ++t) {
    auto fired = CifStep(&state, frames.row(t));
    out.insert(out.end(), fired.begin(), fired.end());
  }
  if (finalize) {
    if (auto last = CifFinalize(&state)) out.push_back(*last);
  }
  return out;
}

Var QuantityLoss(const Var& alphas, int target_length) {
  S2S_CHECK(target_length >= 0, "negative target length");
  return Abs(Sub(Sum(alphas), Var(Tensor::Scalar(target_length))));
}

Var ScaleAlphas(const Var& alphas, int target_length) {
  S2S_CHECK(alphas->cols() == 1, "alphas must be a column");
  S2S_CHECK(target_length >= 0, "negative target length");
  const int T = alphas->rows();
  const double n = target_length;
  double s = 0.0;
  for (int t = 0; t < T; ++t) s += alphas->at(t, 0);
  std::vector<double> out(T, 0.0);
  if (target_length > 0) {
    if (!(s > 0.0)) throw NumericError("ScaleAlphas: total weight is zero");
    for (int t = 0; t < T; ++t) out[t] = alphas->at(t, 0) * n / s;
  }
  Tensor value = Tensor::Matrix(T, 1, std::move(out));
  Tape* tape = alphas.tape();
  if (tape == nullptr) return Var(value);
  const Tensor a = alphas.value();
  const int parent = alphas.node();
  return tape->Record(value, [a, parent, n, s, T](std::span<const double> g, Tape& tp) {
    if (n == 0.0) return;
    double ga = 0.0;
    for (int t = 0; t < T; ++t) ga += g[t] * a[t];
    auto& pg = tp.GradOf(parent);
    for (int t = 0; t < T; ++t) pg[t] += n / s * g[t] - n / (s * s) * ga;
  });
}

namespace {

double Overlap(double lo, double hi, int i) {
  return std::max(0.0, std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i)));
}

}  // namespace

Var CifIntegrate(const Var& alphas, const Var& values, int num_prompts) {
  S2S_CHECK(alphas->cols() == 1, "alphas must be a column");
  S2S_CHECK(alphas->rows() == values->rows(), "alphas/values length mismatch");
  S2S_CHECK(num_prompts >= 0, "negative prompt count");
  const int T = values->rows(), D = values->cols();
  std::vector<double> cum(T + 1, 0.0);
  for (int t = 0; t < T; ++t) {
    if (alphas->at(t, 0) < 0.0) throw NumericError("CifIntegrate: negative weight");
    cum[t + 1] = cum[t] + alphas->at(t, 0);
  }
  std::vector<double> out(static_cast<std::size_t>(num_prompts) * D, 0.0);
  for (int t = 0; t < T; ++t) {
    const int first = static_cast<int>(std::floor(cum[t]));
    for (int i = std::max(0, first); i < num_prompts && i < cum[t + 1]; ++i) {
      const double w = Overlap(cum[t], cum[t + 1], i);
      if (w <= 0.0) continue;
      for (int j = 0; j < D; ++j) out[static_cast<std::size_t>(i) * D + j] += w * values->at(t, j);
    }
  }
  if (num_prompts == 0) return Var(Tensor::Zeros({0, D}));
  Tensor value = Tensor::Matrix(num_prompts, D, std::move(out));
  Tape* tape = CommonTape({&alphas, &values});
  if (tape == nullptr) return Var(value);
  const Tensor v = values.value();
  const int a_node = alphas.tracked() ? alphas.node() : -1;
  const int v_node = values.tracked() ? values.node() : -1;
  return tape->Record(value, [cum, v, a_node, v_node, T, D, num_prompts](
                                 std::span<const double> g, Tape& tp) {
    std::vector<double> dcum(T + 1, 0.0);
    std::vector<double>* vg = v_node >= 0 ? &tp.GradOf(v_node) : nullptr;
    for (int t = 0; t < T; ++t) {
      const double lo = cum[t], hi = cum[t + 1];
      const int first = static_cast<int>(std::floor(lo));
      for (int i = std::max(0, first); i < num_prompts && i < hi; ++i) {
        const double w = Overlap(lo, hi, i);
        if (w <= 0.0) continue;
        double gw = 0.0;
        for (int j = 0; j < D; ++j) {
          const double gi = g[static_cast<std::size_t>(i) * D + j];
          gw += gi * v.at(t, j);
          if (vg) (*vg)[static_cast<std::size_t>(t) * D + j] += w * gi;
        }
        if (hi < i + 1.0) dcum[t + 1] += gw;
        if (lo > i) dcum[t] -= gw;
      }
    }
    if (a_node < 0) return;
    auto& ag = tp.GradOf(a_node);
    double suffix = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      suffix += dcum[t + 1];
      ag[t] += suffix;
    }
  });
}

Var CifAlphas(const Var& encoder_out) {
  const int d = encoder_out->cols();
  return Sigmoid(SliceCols(encoder_out, d - 1, d));
}

Var CifValues(const Var& encoder_out) {
  return SliceCols(encoder_out, 0, encoder_out->cols() - 1);
}

PromptProjector::PromptProjector(int value_width, int lm_width, Rng& rng)
    : proj("cif.proj", value_width, lm_width, rng) {}

Tensor PromptProjector::Project(std::span<const PromptVector> prompts) {
  const int D = proj.in();
  if (prompts.empty()) return Tensor::Zeros({0, proj.out()});
  std::vector<double> rows;
  rows.reserve(prompts.size() * D);
  for (const auto& p : prompts) {
    S2S_CHECK(static_cast<int>(p.values.size()) == D, "prompt width mismatch");
    rows.insert(rows.end(), p.values.begin(), p.values.end());
  }
  return proj.Forward(Var(Tensor::Matrix(static_cast<int>(prompts.size()), D, std::move(rows))),
                      nullptr)
      .value();
}

}  // namespace simuls2s
