// src/metrics/latency.cc

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

#include "simuls2s/metrics/latency.h"

#include <algorithm>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace {

double Lagging(std::span<const double> delays, double source_ms, double ref_len) {
  if (delays.empty()) throw DataError("lagging is undefined for an empty hypothesis");
  if (!(ref_len > 0.0)) throw DataError("reference length must be positive");
  if (!(source_ms > 0.0)) throw DataError("source duration must be positive");
  const double rate = source_ms / ref_len;
  std::size_t tau = delays.size();
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (delays[i] >= source_ms) {
      tau = i + 1;
      break;
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < tau; ++i) sum += delays[i] - static_cast<double>(i) * rate;
  return sum / static_cast<double>(tau);
}

}  // namespace

double AverageLagging(std::span<const double> delays_ms, double source_ms, int ref_words) {
  return Lagging(delays_ms, source_ms, ref_words);
}

double LengthAdaptiveAverageLagging(std::span<const double> delays_ms, double source_ms,
                                    int ref_words) {
  const double len = std::max<double>(ref_words, static_cast<double>(delays_ms.size()));
  return Lagging(delays_ms, source_ms, len);
}

double AverageTokenDelay(std::span<const TimedSegment> inputs,
                         std::span<const TimedSegment> outputs) {
  if (outputs.empty()) throw DataError("ATD is undefined without output");
  if (inputs.empty()) throw DataError("ATD is undefined without input");
  double out_cum = 0.0, sum = 0.0;
  std::size_t j = 0;
  double in_cum = inputs[0].duration_ms;
  for (const TimedSegment& o : outputs) {
    out_cum += o.duration_ms;
    while (in_cum < out_cum && j + 1 < inputs.size()) in_cum += inputs[++j].duration_ms;
    sum += std::max(0.0, o.time_ms - inputs[j].time_ms);
  }
  return sum / static_cast<double>(outputs.size());
}

std::vector<TimedSegment> InputSegments(const SessionLog& log, double frame_ms) {
  std::vector<TimedSegment> out;
  for (const auto& e : log.events) {
    if (e.kind == EventKind::kReadChunk) {
      out.push_back({e.t_ms, e.payload.at("frames").get<int>() * frame_ms});
    }
  }
  return out;
}

std::vector<TimedSegment> OutputSegments(const SessionLog& log) {
  std::vector<TimedSegment> out;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::kWaveformSegment) continue;
    const int n = e.payload.at("tokens").get<int>();
    const double d = e.payload.at("duration_ms").get<double>();
    for (int i = 0; i < n; ++i) out.push_back({e.t_ms, d / n});
  }
  return out;
}

std::vector<double> TextDelays(const SessionLog& log) {
  std::vector<double> out;
  for (const auto& e : log.events) {
    if (e.kind == EventKind::kTextToken) out.push_back(e.t_ms);
  }
  return out;
}

std::pair<double, double> Offsets(std::span<const TimedSegment> outputs, double source_ms) {
  if (outputs.empty()) throw DataError("offsets are undefined without output");
  return {outputs.front().time_ms, outputs.back().time_ms - source_ms};
}

LatencyReport ComputeLatency(const SessionLog& log, double source_ms, int ref_words,
                             double frame_ms) {
  LatencyReport r;
  const std::vector<double> delays = TextDelays(log);
  r.al_ms = AverageLagging(delays, source_ms, ref_words);
  r.laal_ms = LengthAdaptiveAverageLagging(delays, source_ms, ref_words);
  const auto inputs = InputSegments(log, frame_ms);
  const auto outputs = OutputSegments(log);
  r.atd_ms = AverageTokenDelay(inputs, outputs);
  std::tie(r.start_offset_ms, r.end_offset_ms) = Offsets(outputs, source_ms);
  return r;
}

}  // namespace simuls2s
