// include/simuls2s/numerics/checkpoint.h

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

#ifndef SIMULS2S_NUMERICS_CHECKPOINT_H_
#define SIMULS2S_NUMERICS_CHECKPOINT_H_

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "simuls2s/numerics/autograd.h"

namespace simuls2s {

// Container layout (all integers little-endian):
//   8 bytes  magic "S2SCKPT\0"
//   u32      format version
//   u64      manifest length in bytes
//   manifest JSON: {"version", "meta", "tensors": [{"name", "shape", "dtype":
//            "f64", "offset", "count"}]}; offsets count doubles from the
//            start of the payload
//   payload  raw little-endian IEEE-754 doubles
inline constexpr unsigned kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Tensor> tensors;
};

void SaveCheckpoint(const std::string& path, const std::vector<const Parameter*>& params,
                    const nlohmann::json& meta);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies stored tensors into `params` by name. Missing names or shape
// mismatches throw DataError unless listed in `optional_prefixes`.
void RestoreParameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params,
                       const std::vector<std::string>& optional_prefixes = {});

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_CHECKPOINT_H_
