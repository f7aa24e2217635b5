// include/simuls2s/base/error.h

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

#ifndef SIMULS2S_BASE_ERROR_H_
#define SIMULS2S_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace simuls2s {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments or configuration (exit code 1).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

// Malformed, missing or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// Non-finite values or impossible numeric conditions (exit code 3).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

// Violated precondition of a library call.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what) {}
};

[[noreturn]] void ThrowCheckFailure(const char* file, int line,
                                    const char* cond, const std::string& msg);

}  // namespace simuls2s

#define S2S_CHECK(cond, msg)                                              \
  do {                                                                    \
    if (!(cond))                                                          \
      ::simuls2s::ThrowCheckFailure(__FILE__, __LINE__, #cond, (msg));    \
  } while (0)

#endif  // SIMULS2S_BASE_ERROR_H_
