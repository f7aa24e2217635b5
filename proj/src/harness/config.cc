// src/harness/config.cc

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

#include "simuls2s/harness/config.h"

#include <fstream>
#include <sstream>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::pair<std::string, std::string> SplitAssignment(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw UsageError("expected key=value, got '" + line + "'");
  std::string key = Trim(line.substr(0, eq));
  if (key.empty()) throw UsageError("empty key in '" + line + "'");
  return {key, Trim(line.substr(eq + 1))};
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  KeyValueConfig c;
  std::istringstream is(text);
  std::string section;
  for (std::string line; std::getline(is, line);) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError("bad section header '" + line + "'");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto [key, value] = SplitAssignment(line);
    c.values_[section.empty() ? key : section + "." + key] = value;
  }
  return c;
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return Parse(ss.str());
}

void KeyValueConfig::Override(const std::string& assignment) {
  auto [key, value] = SplitAssignment(assignment);
  values_[key] = value;
}

std::string KeyValueConfig::GetString(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int KeyValueConfig::GetInt(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " expects an integer, got '" + it->second + "'");
  }
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " expects a number, got '" + it->second + "'");
  }
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw UsageError("config key " + key + " expects true/false, got '" + it->second + "'");
}

std::vector<int> KeyValueConfig::GetIntList(const std::string& key,
                                            const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::istringstream is(it->second);
  for (std::string item; std::getline(is, item, ',');) {
    KeyValueConfig one;
    one.Set("v", Trim(item));
    out.push_back(one.GetInt("v", 0));
  }
  return out;
}

}  // namespace simuls2s
