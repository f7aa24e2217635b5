// include/simuls2s/scheduler/session_log.h

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

#ifndef SIMULS2S_SCHEDULER_SESSION_LOG_H_
#define SIMULS2S_SCHEDULER_SESSION_LOG_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace simuls2s {

enum class EventKind { kReadChunk, kTextToken, kSpeechTokens, kWaveformSegment };

const char* EventKindName(EventKind kind);
EventKind ParseEventKind(const std::string& name);

// Payloads by kind:
//   read-chunk        {chunk, frames, prompts, total_prompts, final}
//   text-token        {token, index}
//   speech-tokens     {tokens: [...]}
//   waveform-segment  {duration_ms, tokens, samples}
struct EmissionEvent {
  EventKind kind;
  double t_ms = 0.0;
  std::optional<std::int64_t> wall_ns;
  nlohmann::json payload;
};

struct SessionLog {
  std::vector<EmissionEvent> events;

  void Add(EventKind kind, double t_ms, nlohmann::json payload,
           std::optional<std::int64_t> wall_ns = std::nullopt);
};

// One JSON object per line with fields kind, t_ms, wall_ns (when present)
// and payload.
void WriteJsonl(std::ostream& os, const SessionLog& log);
std::string ToJsonl(const SessionLog& log);
SessionLog ReadJsonl(std::istream& is);

}  // namespace simuls2s

#endif  // SIMULS2S_SCHEDULER_SESSION_LOG_H_
