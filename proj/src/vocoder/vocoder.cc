// src/vocoder/vocoder.cc

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

#include "simuls2s/vocoder/vocoder.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "simuls2s/base/error.h"

namespace simuls2s {

WaveSegment Synthesize(std::span<const int> units) {
  WaveSegment seg;
  seg.units.assign(units.begin(), units.end());
  seg.samples.reserve(units.size() * kSamplesPerUnit);
  for (int s : units) {
    if (s < 1) throw DataError("speech unit ids start at 1, got " + std::to_string(s));
    const double freq = 200.0 + 5.0 * s;
    for (int n = 0; n < kSamplesPerUnit; ++n) {
      seg.samples.push_back(0.3 * std::sin(2.0 * std::numbers::pi * freq * n / kSampleRate));
    }
  }
  return seg;
}

namespace {

void PutLe(std::ofstream& os, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

void WriteWav(const std::string& path, std::span<const double> samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  PutLe(os, 36 + data_bytes, 4);
  os.write("WAVEfmt ", 8);
  PutLe(os, 16, 4);
  PutLe(os, 1, 2);  // PCM
  PutLe(os, 1, 2);  // mono
  PutLe(os, kSampleRate, 4);
  PutLe(os, kSampleRate * 2, 4);
  PutLe(os, 2, 2);
  PutLe(os, 16, 2);
  os.write("data", 4);
  PutLe(os, data_bytes, 4);
  for (double x : samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    PutLe(os, static_cast<std::uint16_t>(v), 2);
  }
  if (!os) throw DataError("write failed for " + path);
}

}  // namespace simuls2s
