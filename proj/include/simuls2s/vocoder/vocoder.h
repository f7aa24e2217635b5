// include/simuls2s/vocoder/vocoder.h

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

#ifndef SIMULS2S_VOCODER_VOCODER_H_
#define SIMULS2S_VOCODER_VOCODER_H_

#include <span>
#include <string>
#include <vector>

namespace simuls2s {

inline constexpr int kSampleRate = 16000;
inline constexpr int kSamplesPerUnit = 320;  // 20 ms
inline constexpr double kUnitDurationMs = 20.0;

struct WaveSegment {
  std::vector<double> samples;
  std::vector<int> units;

  double duration_ms() const { return kUnitDurationMs * static_cast<double>(units.size()); }
};

// Unit s becomes a 20 ms sine burst at 200 + 5 * s Hz with amplitude 0.3 and
// phase restarted at zero, so segments depend only on their own units.
WaveSegment Synthesize(std::span<const int> units);

// Mono 16 kHz 16-bit PCM. Samples are clipped to [-1, 1].
void WriteWav(const std::string& path, std::span<const double> samples);

}  // namespace simuls2s

#endif  // SIMULS2S_VOCODER_VOCODER_H_
