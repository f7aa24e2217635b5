// include/simuls2s/harness/config.h

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

#ifndef SIMULS2S_HARNESS_CONFIG_H_
#define SIMULS2S_HARNESS_CONFIG_H_

#include <map>
#include <string>
#include <vector>

namespace simuls2s {

// Flat key = value settings. Lines starting with '#' and blank lines are
// ignored; section headers like [train] prefix the following keys with
// "train.". Values keep surrounding quotes stripped.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::string& path);

  // "key=value" override, as given on the command line.
  void Override(const std::string& assignment);
  void Set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::string GetString(const std::string& key, const std::string& fallback) const;
  int GetInt(const std::string& key, int fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  // Comma-separated integers.
  std::vector<int> GetIntList(const std::string& key, const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace simuls2s

#endif  // SIMULS2S_HARNESS_CONFIG_H_
