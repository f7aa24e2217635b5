// include/simuls2s/harness/evaluate.h

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

#ifndef SIMULS2S_HARNESS_EVALUATE_H_
#define SIMULS2S_HARNESS_EVALUATE_H_

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "simuls2s/harness/bundle.h"
#include "simuls2s/harness/synthetic.h"
#include "simuls2s/ngram/ngram.h"

namespace simuls2s {

// k value recorded for offline rows.
inline constexpr int kOfflineK = 0;

struct EvalOptions {
  std::vector<int> k_list{1, 2, 3, 4, 5, 6};
  bool offline = false;  // run whole-utterance decoding instead of the sweep
  SessionConfig session;
  int threads = 1;
  std::string log_dir;  // when set, every SessionLog is written here
};

struct SessionRow {
  std::string system;  // cif, stack16 or offline
  int k = 0;
  std::string id;
  double bleu = 0.0;       // sentence BLEU on text
  double unit_bleu = 0.0;  // sentence BLEU on speech units
  double al_ms = 0.0;
  double laal_ms = 0.0;
  double atd_ms = 0.0;
  double start_offset_ms = 0.0;
  double end_offset_ms = 0.0;
  double source_ms = 0.0;
  bool has_text = false;
  bool has_speech = false;
  std::vector<int> text;
  std::vector<int> units;
};

struct SweepPoint {
  std::string system;
  int k = 0;
  int sessions = 0;
  double bleu = 0.0;       // corpus BLEU on text
  double unit_bleu = 0.0;  // corpus BLEU on units
  double al_ms = 0.0;
  double laal_ms = 0.0;
  double atd_ms = 0.0;
  double start_offset_ms = 0.0;
  double end_offset_ms = 0.0;
};

struct EvalReport {
  std::vector<SessionRow> rows;
  std::vector<SweepPoint> points;
};

// Text ids after stripping everything below kFirstTargetId.
std::vector<int> TargetWords(const std::vector<int>& text);

// Runs one session per (k, utterance), or one offline session per utterance.
// Utterances are spread over `threads` workers; rows keep input order.
EvalReport EvaluateSweep(ModelBundle& bundle, const NGramModel* ngram,
                         const std::vector<Utterance>& test, const EvalOptions& options);

void WriteCsv(const std::string& path, const EvalReport& report);
nlohmann::json ReportJson(const EvalReport& report);
SweepPoint SweepPointFromJson(const nlohmann::json& j);
// bleu_al.tsv (system, k, AL, BLEU) and unit_atd.tsv (system, k, ATD,
// unit BLEU) under `dir`.
void WritePlotData(const std::string& dir, const std::vector<SweepPoint>& points);

// Piecewise-linear value at x of a curve given as (x, y) points; the points
// are sorted by x first. Returns NaN outside [min x, max x].
double InterpolateAt(std::vector<std::pair<double, double>> curve, double x);

}  // namespace simuls2s

#endif  // SIMULS2S_HARNESS_EVALUATE_H_
