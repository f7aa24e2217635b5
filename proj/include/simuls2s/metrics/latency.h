// include/simuls2s/metrics/latency.h

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

#ifndef SIMULS2S_METRICS_LATENCY_H_
#define SIMULS2S_METRICS_LATENCY_H_

#include <span>
#include <vector>

#include "simuls2s/scheduler/session_log.h"

namespace simuls2s {

// A stretch of input or output: available / emitted at time_ms, lasting
// duration_ms.
struct TimedSegment {
  double time_ms;
  double duration_ms;
};

// delays_ms[i] is the emission time of hypothesis word i + 1. Throws
// DataError for an empty hypothesis or a non-positive reference length.
double AverageLagging(std::span<const double> delays_ms, double source_ms, int ref_words);

// AverageLagging with the reference length replaced by max(|Y|, |Y*|).
double LengthAdaptiveAverageLagging(std::span<const double> delays_ms, double source_ms,
                                    int ref_words);

// Output sub-segment i (cumulative output duration o_i) is paired with the
// earliest input time whose cumulative input duration reaches o_i, or the
// last input time if the input never does. Each term is floored at 0.
double AverageTokenDelay(std::span<const TimedSegment> inputs,
                         std::span<const TimedSegment> outputs);

struct LatencyReport {
  double al_ms = 0.0;
  double laal_ms = 0.0;
  double atd_ms = 0.0;
  double start_offset_ms = 0.0;
  double end_offset_ms = 0.0;
};

// Segments recovered from a session log: read-chunk events give input
// segments (frames * frame_ms), waveform segments are split into one output
// segment per speech unit.
std::vector<TimedSegment> InputSegments(const SessionLog& log, double frame_ms = 20.0);
std::vector<TimedSegment> OutputSegments(const SessionLog& log);
std::vector<double> TextDelays(const SessionLog& log);

// StartOffset = first output time; EndOffset = last output time minus the
// source duration. Throws DataError when there is no output.
std::pair<double, double> Offsets(std::span<const TimedSegment> outputs, double source_ms);

// AL / LAAL over text tokens, ATD and offsets over speech output.
LatencyReport ComputeLatency(const SessionLog& log, double source_ms, int ref_words,
                             double frame_ms = 20.0);

}  // namespace simuls2s

#endif  // SIMULS2S_METRICS_LATENCY_H_
