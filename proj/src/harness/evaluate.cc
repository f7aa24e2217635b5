// src/harness/evaluate.cc

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

#include "simuls2s/harness/evaluate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <thread>

#include "simuls2s/base/error.h"
#include "simuls2s/metrics/bleu.h"
#include "simuls2s/metrics/latency.h"

namespace simuls2s {

namespace fs = std::filesystem;

std::vector<int> TargetWords(const std::vector<int>& text) {
  std::vector<int> out;
  for (int t : text)
    if (t >= kFirstTargetId) out.push_back(t);
  return out;
}

namespace {

SessionRow Score(const SessionResult& r, const Utterance& u, const std::string& system, int k) {
  SessionRow row;
  row.system = system;
  row.k = k;
  row.id = u.id;
  row.source_ms = r.source_ms;
  row.text = r.text;
  row.units = r.units;
  const std::vector<int> hyp = TargetWords(r.text);
  row.bleu = CorpusBleu(std::vector<std::vector<int>>{hyp}, {u.target});
  row.unit_bleu = CorpusBleu(std::vector<std::vector<int>>{r.units}, {u.units});

  const std::vector<double> delays = TextDelays(r.log);
  row.has_text = !delays.empty();
  const int ref_words = static_cast<int>(u.target.size());
  if (row.has_text) {
    row.al_ms = AverageLagging(delays, r.source_ms, ref_words);
    row.laal_ms = LengthAdaptiveAverageLagging(delays, r.source_ms, ref_words);
  } else {
    // No words: scored as if everything arrived with the end of the source.
    row.al_ms = row.laal_ms = r.source_ms;
  }
  const auto outputs = OutputSegments(r.log);
  row.has_speech = !outputs.empty();
  if (row.has_speech) {
    row.atd_ms = AverageTokenDelay(InputSegments(r.log), outputs);
    std::tie(row.start_offset_ms, row.end_offset_ms) = Offsets(outputs, r.source_ms);
  } else {
    row.start_offset_ms = r.source_ms;
  }
  return row;
}

template <typename Fn>
void ParallelFor(int n, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i; (i = next++) < n && !failed;) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      (void)t;
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SweepPoint Aggregate(const std::vector<SessionRow>& rows, const std::vector<Utterance>& test,
                     std::size_t begin) {
  SweepPoint p;
  p.system = rows[begin].system;
  p.k = rows[begin].k;
  p.sessions = static_cast<int>(test.size());
  std::vector<std::vector<int>> hyps, refs, uh, ur;
  int speech = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const SessionRow& r = rows[begin + i];
    hyps.push_back(TargetWords(r.text));
    refs.push_back(test[i].target);
    uh.push_back(r.units);
    ur.push_back(test[i].units);
    p.al_ms += r.al_ms;
    p.laal_ms += r.laal_ms;
    if (r.has_speech) {
      p.atd_ms += r.atd_ms;
      p.start_offset_ms += r.start_offset_ms;
      p.end_offset_ms += r.end_offset_ms;
      ++speech;
    }
  }
  p.bleu = CorpusBleu(hyps, refs);
  p.unit_bleu = CorpusBleu(uh, ur);
  p.al_ms /= p.sessions;
  p.laal_ms /= p.sessions;
  if (speech > 0) {
    p.atd_ms /= speech;
    p.start_offset_ms /= speech;
    p.end_offset_ms /= speech;
  }
  return p;
}

}  // namespace

EvalReport EvaluateSweep(ModelBundle& bundle, const NGramModel* ngram,
                         const std::vector<Utterance>& test, const EvalOptions& options) {
  if (test.empty()) throw DataError("test set is empty");
  SessionConfig base = options.session;
  base.mode = bundle.config().mode;
  base.chunk_size_frames = bundle.config().encoder.chunk_size_frames;
  const SessionModels models = bundle.Models(ngram);
  const std::string system = options.offline ? "offline" : PromptModeName(base.mode);
  const std::vector<int> ks = options.offline ? std::vector<int>{kOfflineK} : options.k_list;
  if (ks.empty()) throw UsageError("empty k list");
  if (!options.log_dir.empty()) fs::create_directories(options.log_dir);

  EvalReport report;
  for (int k : ks) {
    SessionConfig c = base;
    if (!options.offline) c.k = k;
    std::vector<SessionRow> rows(test.size());
    ParallelFor(static_cast<int>(test.size()), options.threads, [&](int i) {
      const SessionResult r = options.offline ? RunOffline(test[i].frames, models, c)
                                              : RunSession(test[i].frames, models, c);
      rows[i] = Score(r, test[i], system, k);
      if (!options.log_dir.empty()) {
        std::ofstream os(fs::path(options.log_dir) /
                         (system + "-k" + std::to_string(k) + "-" + test[i].id + ".jsonl"));
        WriteJsonl(os, r.log);
      }
    });
    const std::size_t begin = report.rows.size();
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.points.push_back(Aggregate(report.rows, test, begin));
  }
  return report;
}

void WriteCsv(const std::string& path, const EvalReport& report) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  os << "system,k,id,BLEU,unit_BLEU,AL,LAAL,ATD,StartOffset,EndOffset,source_ms\n";
  os << std::setprecision(10);
  for (const SessionRow& r : report.rows) {
    os << r.system << ',' << r.k << ',' << r.id << ',' << r.bleu << ',' << r.unit_bleu << ','
       << r.al_ms << ',' << r.laal_ms << ',' << r.atd_ms << ',' << r.start_offset_ms << ','
       << r.end_offset_ms << ',' << r.source_ms << '\n';
  }
}

nlohmann::json ReportJson(const EvalReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const SweepPoint& p : report.points) {
    points.push_back({{"system", p.system},
                      {"k", p.k},
                      {"sessions", p.sessions},
                      {"bleu", p.bleu},
                      {"unit_bleu", p.unit_bleu},
                      {"al_ms", p.al_ms},
                      {"laal_ms", p.laal_ms},
                      {"atd_ms", p.atd_ms},
                      {"start_offset_ms", p.start_offset_ms},
                      {"end_offset_ms", p.end_offset_ms}});
  }
  return {{"points", points}};
}

SweepPoint SweepPointFromJson(const nlohmann::json& j) {
  SweepPoint p;
  p.system = j.at("system");
  p.k = j.at("k");
  p.sessions = j.at("sessions");
  p.bleu = j.at("bleu");
  p.unit_bleu = j.at("unit_bleu");
  p.al_ms = j.at("al_ms");
  p.laal_ms = j.at("laal_ms");
  p.atd_ms = j.at("atd_ms");
  p.start_offset_ms = j.at("start_offset_ms");
  p.end_offset_ms = j.at("end_offset_ms");
  return p;
}

void WritePlotData(const std::string& dir, const std::vector<SweepPoint>& points) {
  fs::create_directories(dir);
  std::ofstream a(fs::path(dir) / "bleu_al.tsv"), b(fs::path(dir) / "unit_atd.tsv");
  if (!a || !b) throw DataError("cannot write plot data in " + dir);
  a << "system\tk\tAL\tBLEU\n" << std::setprecision(10);
  b << "system\tk\tATD\tunit_BLEU\n" << std::setprecision(10);
  for (const SweepPoint& p : points) {
    a << p.system << '\t' << p.k << '\t' << p.al_ms << '\t' << p.bleu << '\n';
    b << p.system << '\t' << p.k << '\t' << p.atd_ms << '\t' << p.unit_bleu << '\n';
  }
}

double InterpolateAt(std::vector<std::pair<double, double>> curve, double x) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (curve.empty()) return nan;
  std::sort(curve.begin(), curve.end());
  if (x < curve.front().first || x > curve.back().first) return nan;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto [x0, y0] = curve[i];
    const auto [x1, y1] = curve[i + 1];
    if (x >= x0 && x <= x1) {
      if (x1 == x0) return std::max(y0, y1);
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return curve.back().second;
}

}  // namespace simuls2s
