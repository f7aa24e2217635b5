// src/numerics/checkpoint.cc

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

#include "simuls2s/numerics/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "simuls2s/base/error.h"

namespace simuls2s {
namespace {

constexpr char kMagic[8] = {'S', '2', 'S', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void PutLe(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T GetLe(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw DataError("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const std::vector<const Parameter*>& params,
                    const nlohmann::json& meta) {
  nlohmann::json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["meta"] = meta;
  manifest["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const Parameter* p : params) {
    manifest["tensors"].push_back({{"name", p->name},
                                   {"shape", p->value.shape()},
                                   {"dtype", "f64"},
                                   {"offset", offset},
                                   {"count", p->value.size()}});
    offset += p->value.size();
  }
  const std::string text = manifest.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path);
  os.write(kMagic, sizeof(kMagic));
  PutLe<std::uint32_t>(os, kCheckpointVersion);
  PutLe<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : params)
    for (double v : p->value.data()) PutLe<double>(os, v);
  if (!os) throw DataError("failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + " is not a checkpoint");
  }
  const auto version = GetLe<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto manifest_size = GetLe<std::uint64_t>(is);
  std::string text(manifest_size, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(manifest_size))) {
    throw DataError("truncated checkpoint manifest");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint manifest: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  std::uint64_t expected_offset = 0;
  for (const auto& entry : manifest.at("tensors")) {
    if (entry.at("dtype") != "f64") throw DataError("unsupported dtype in checkpoint");
    if (entry.at("offset").get<std::uint64_t>() != expected_offset) {
      throw DataError("non-contiguous checkpoint payload");
    }
    const auto count = entry.at("count").get<std::uint64_t>();
    std::vector<double> data(count);
    for (auto& v : data) v = GetLe<double>(is);
    expected_offset += count;
    Shape shape = entry.at("shape").get<Shape>();
    ckpt.tensors.emplace(entry.at("name").get<std::string>(), Tensor(shape, std::move(data)));
  }
  return ckpt;
}

void RestoreParameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params,
                       const std::vector<std::string>& optional_prefixes) {
  for (Parameter* p : params) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end()) {
      bool optional = false;
      for (const auto& prefix : optional_prefixes) optional |= p->name.rfind(prefix, 0) == 0;
      if (optional) continue;
      throw DataError("checkpoint lacks parameter " + p->name);
    }
    if (it->second.shape() != p->value.shape()) {
      throw DataError("shape mismatch for " + p->name + ": checkpoint " +
                      ShapeToString(it->second.shape()) + ", model " +
                      ShapeToString(p->value.shape()));
    }
    p->value = it->second;
    p->ZeroGrad();
  }
}

}  // namespace simuls2s
