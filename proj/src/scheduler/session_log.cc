// src/scheduler/session_log.cc

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

#include "simuls2s/scheduler/session_log.h"

#include <istream>
#include <ostream>
#include <sstream>

#include "simuls2s/base/error.h"

namespace simuls2s {

const char* EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kReadChunk:
      return "read-chunk";
    case EventKind::kTextToken:
      return "text-token";
    case EventKind::kSpeechTokens:
      return "speech-tokens";
    case EventKind::kWaveformSegment:
      return "waveform-segment";
  }
  return "?";
}

EventKind ParseEventKind(const std::string& name) {
  for (EventKind k : {EventKind::kReadChunk, EventKind::kTextToken, EventKind::kSpeechTokens,
                      EventKind::kWaveformSegment}) {
    if (name == EventKindName(k)) return k;
  }
  throw DataError("unknown event kind '" + name + "'");
}

void SessionLog::Add(EventKind kind, double t_ms, nlohmann::json payload,
                     std::optional<std::int64_t> wall_ns) {
  if (!events.empty() && t_ms < events.back().t_ms) {
    throw Error("session log times must be non-decreasing");
  }
  events.push_back({kind, t_ms, wall_ns, std::move(payload)});
}

void WriteJsonl(std::ostream& os, const SessionLog& log) {
  for (const auto& e : log.events) {
    nlohmann::json j;
    j["kind"] = EventKindName(e.kind);
    j["t_ms"] = e.t_ms;
    if (e.wall_ns) j["wall_ns"] = *e.wall_ns;
    j["payload"] = e.payload;
    os << j.dump() << "\n";
  }
}

std::string ToJsonl(const SessionLog& log) {
  std::ostringstream os;
  WriteJsonl(os, log);
  return os.str();
}

SessionLog ReadJsonl(std::istream& is) {
  SessionLog log;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EmissionEvent e{ParseEventKind(j.at("kind").get<std::string>()), j.at("t_ms").get<double>(),
                      std::nullopt, j.at("payload")};
      if (j.contains("wall_ns")) e.wall_ns = j.at("wall_ns").get<std::int64_t>();
      log.events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError("session log line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return log;
}

}  // namespace simuls2s
