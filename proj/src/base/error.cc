// src/base/error.cc

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

#include "simuls2s/base/error.h"

#include <sstream>

namespace simuls2s {

void ThrowCheckFailure(const char* file, int line, const char* cond,
                       const std::string& msg) {
  std::ostringstream os;
  os << msg << " [" << cond << " failed at " << file << ":" << line << "]";
  throw ShapeError(os.str());
}

}  // namespace simuls2s
