// src/harness/synthetic.cc

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

#include "simuls2s/harness/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "simuls2s/base/error.h"

namespace simuls2s {

namespace fs = std::filesystem;

void SyntheticTaskSpec::Validate() const {
  if (src_vocab < 2) throw UsageError("src_vocab must be >= 2");
  if (tgt_vocab < src_vocab) throw UsageError("tgt_vocab must be >= src_vocab");
  if (unit_vocab < 1) throw UsageError("unit_vocab must be >= 1");
  if (frames_min < 1 || frames_max < frames_min) throw UsageError("bad frames range");
  if (units_min < 1 || units_max < units_min) throw UsageError("bad units range");
  if (len_min < 1 || len_max < len_min) throw UsageError("bad length range");
  if (swap_prob < 0.0 || swap_prob > 1.0) throw UsageError("swap_prob must be in [0, 1]");
  if (noise_sigma < 0.0) throw UsageError("noise_sigma must be >= 0");
  if (feature_dim < 1) throw UsageError("feature_dim must be >= 1");
}

nlohmann::json SyntheticTaskSpec::ToJson() const {
  return {{"src_vocab", src_vocab},     {"tgt_vocab", tgt_vocab},   {"unit_vocab", unit_vocab},
          {"frames_min", frames_min},   {"frames_max", frames_max}, {"swap_prob", swap_prob},
          {"units_min", units_min},     {"units_max", units_max},   {"noise_sigma", noise_sigma},
          {"feature_dim", feature_dim}, {"len_min", len_min},       {"len_max", len_max},
          {"seed", seed}};
}

SyntheticTaskSpec SyntheticTaskSpec::FromJson(const nlohmann::json& j) {
  SyntheticTaskSpec s;
  s.src_vocab = j.at("src_vocab");
  s.tgt_vocab = j.at("tgt_vocab");
  s.unit_vocab = j.at("unit_vocab");
  s.frames_min = j.at("frames_min");
  s.frames_max = j.at("frames_max");
  s.swap_prob = j.at("swap_prob");
  s.units_min = j.at("units_min");
  s.units_max = j.at("units_max");
  s.noise_sigma = j.at("noise_sigma");
  s.feature_dim = j.at("feature_dim");
  s.len_min = j.at("len_min");
  s.len_max = j.at("len_max");
  s.seed = j.at("seed");
  s.Validate();
  return s;
}

SyntheticTaskSpec SyntheticTaskSpec::FromConfig(const KeyValueConfig& c) {
  SyntheticTaskSpec s;
  s.src_vocab = c.GetInt("data.src_vocab", s.src_vocab);
  s.tgt_vocab = c.GetInt("data.tgt_vocab", s.tgt_vocab);
  s.unit_vocab = c.GetInt("data.unit_vocab", s.unit_vocab);
  s.frames_min = c.GetInt("data.frames_min", s.frames_min);
  s.frames_max = c.GetInt("data.frames_max", s.frames_max);
  s.swap_prob = c.GetDouble("data.swap_prob", s.swap_prob);
  s.units_min = c.GetInt("data.units_min", s.units_min);
  s.units_max = c.GetInt("data.units_max", s.units_max);
  s.noise_sigma = c.GetDouble("data.noise_sigma", s.noise_sigma);
  s.feature_dim = c.GetInt("data.feature_dim", s.feature_dim);
  s.len_min = c.GetInt("data.len_min", s.len_min);
  s.len_max = c.GetInt("data.len_max", s.len_max);
  s.seed = static_cast<std::uint64_t>(c.GetInt("data.seed", static_cast<int>(s.seed)));
  s.Validate();
  return s;
}

SyntheticTask::SyntheticTask(const SyntheticTaskSpec& s) : spec(s) {
  spec.Validate();
  std::seed_seq seq{static_cast<std::uint64_t>(0x7a5c), spec.seed};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  embeddings.resize(spec.src_vocab);
  for (auto& e : embeddings) {
    e.resize(spec.feature_dim);
    for (double& x : e) x = normal(rng);
  }
  std::vector<int> perm(spec.tgt_vocab);
  for (int i = 0; i < spec.tgt_vocab; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  token_map.assign(perm.begin(), perm.begin() + spec.src_vocab);
  std::vector<int> src(spec.src_vocab);
  for (int i = 0; i < spec.src_vocab; ++i) src[i] = i;
  std::shuffle(src.begin(), src.end(), rng);
  const int triggers = static_cast<int>(std::lround(spec.swap_prob * spec.src_vocab));
  swap_trigger.assign(spec.src_vocab, false);
  for (int i = 0; i < triggers; ++i) swap_trigger[src[i]] = true;
  std::uniform_int_distribution<int> len(spec.units_min, spec.units_max);
  std::uniform_int_distribution<int> unit(1, spec.unit_vocab);
  expansions.resize(spec.tgt_vocab);
  for (auto& e : expansions) {
    e.resize(len(rng));
    for (int& u : e) u = unit(rng);
  }
}

Utterance SyntheticTask::Make(const std::string& split, int index) const {
  std::uint64_t split_hash = 1469598103934665603ull;
  for (unsigned char ch : split) split_hash = (split_hash ^ ch) * 1099511628211ull;
  std::seed_seq seq{spec.seed, split_hash, static_cast<std::uint64_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> n_tokens(spec.len_min, spec.len_max);
  std::uniform_int_distribution<int> n_frames(spec.frames_min, spec.frames_max);
  std::uniform_int_distribution<int> token(0, spec.src_vocab - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  Utterance u;
  u.id = split + "-" + std::to_string(index);
  const int n = n_tokens(rng);
  for (int i = 0; i < n; ++i) {
    int s = token(rng);
    // Adjacent repeats would leave no acoustic boundary between tokens.
    while (i > 0 && s == u.source.back()) s = token(rng);
    u.source.push_back(s);
  }
  std::vector<double> data;
  for (int s : u.source) {
    const int f = n_frames(rng);
    for (int j = 0; j < f; ++j) {
      for (double e : embeddings[s]) data.push_back(e + spec.noise_sigma * noise(rng));
    }
  }
  const int rows = static_cast<int>(data.size()) / spec.feature_dim;
  u.frames = Tensor::Matrix(rows, spec.feature_dim, std::move(data));

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 0; i + 1 < n; ++i) {
    if (swap_trigger[u.source[i]]) {
      std::swap(order[i], order[i + 1]);
      ++i;
    }
  }
  for (int i : order) {
    const int t = token_map[u.source[i]];
    u.target.push_back(kFirstTargetId + t);
    u.units.insert(u.units.end(), expansions[t].begin(), expansions[t].end());
  }
  u.frames_path = "feats/" + u.id + ".bin";
  return u;
}

std::vector<Utterance> GenerateDataset(const SyntheticTaskSpec& spec, const std::string& split,
                                       int n_utterances) {
  if (n_utterances < 0) throw UsageError("negative utterance count");
  const SyntheticTask task(spec);
  std::vector<Utterance> out;
  out.reserve(n_utterances);
  for (int i = 0; i < n_utterances; ++i) out.push_back(task.Make(split, i));
  return out;
}

void WriteFrames(const std::string& path, const Tensor& frames) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  const std::int32_t dims[2] = {frames.rows(), frames.cols()};
  os.write("S2SF", 4);
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  os.write(reinterpret_cast<const char*>(frames.data().data()),
           static_cast<std::streamsize>(frames.size() * sizeof(double)));
  if (!os) throw DataError("write failed for " + path);
}

Tensor ReadFrames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open frame file " + path);
  char magic[4];
  std::int32_t dims[2];
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!is || std::memcmp(magic, "S2SF", 4) != 0) throw DataError("bad frame file " + path);
  if (dims[0] < 1 || dims[1] < 1) throw DataError("bad frame dims in " + path);
  std::vector<double> data(static_cast<std::size_t>(dims[0]) * dims[1]);
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!is) throw DataError("truncated frame file " + path);
  return Tensor::Matrix(dims[0], dims[1], std::move(data));
}

void WriteDataset(const std::string& dir, const std::vector<Utterance>& data,
                  const SyntheticTaskSpec& spec) {
  fs::create_directories(fs::path(dir) / "feats");
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) throw DataError("cannot write manifest in " + dir);
  for (const Utterance& u : data) {
    WriteFrames((fs::path(dir) / u.frames_path).string(), u.frames);
    nlohmann::json j = {{"id", u.id},
                        {"frames", u.frames_path},
                        {"source", u.source},
                        {"target", u.target},
                        {"units", u.units}};
    manifest << j.dump() << "\n";
  }
  std::ofstream task(fs::path(dir) / "task.json");
  task << spec.ToJson().dump(2) << "\n";
}

std::vector<Utterance> ReadDataset(const std::string& dir) {
  const fs::path path = fs::path(dir) / "manifest.jsonl";
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<Utterance> out;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Utterance u;
      u.id = j.at("id");
      u.frames_path = j.at("frames");
      u.source = j.at("source").get<std::vector<int>>();
      u.target = j.at("target").get<std::vector<int>>();
      u.units = j.at("units").get<std::vector<int>>();
      u.frames = ReadFrames((fs::path(dir) / u.frames_path).string());
      out.push_back(std::move(u));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

SyntheticTaskSpec ReadTaskSpec(const std::string& dir) {
  const fs::path path = fs::path(dir) / "task.json";
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  try {
    return SyntheticTaskSpec::FromJson(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace simuls2s
