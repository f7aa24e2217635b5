// tools/simuls2s_main.cc

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

// simuls2s: synthetic data, two-stage training, k-sweep evaluation and
// reports for the simultaneous speech-to-speech toy pipeline.
//
// Usage:
//   simuls2s gen-data --config toy.conf --out data/train --split train --n 2000
//   simuls2s train --stage 1 --config toy.conf --data data/train --out s1.ckpt
//   simuls2s train --stage 2 --config toy.conf --data data/train --init s1.ckpt --out s2.ckpt
//   simuls2s ngram-train --data data/train --order 4 --out units.arpa
//   simuls2s eval --ckpt s2.ckpt --data data/test --k 1,2,3 --mode cif --ngram units.arpa --out rep
//   simuls2s report --in rep/cif/summary.json --in rep/offline/summary.json --out plots
//
// SIMULS2S_THREADS sets the evaluation worker count.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "simuls2s/base/error.h"
#include "simuls2s/harness/bundle.h"
#include "simuls2s/harness/config.h"
#include "simuls2s/harness/evaluate.h"
#include "simuls2s/harness/synthetic.h"
#include "simuls2s/harness/train.h"
#include "simuls2s/ngram/ngram.h"

namespace fs = std::filesystem;
using namespace simuls2s;

namespace {

KeyValueConfig LoadConfig(const std::string& path, const std::vector<std::string>& overrides) {
  KeyValueConfig c = path.empty() ? KeyValueConfig() : KeyValueConfig::Load(path);
  for (const auto& o : overrides) c.Override(o);
  return c;
}

int EnvThreads() {
  const char* v = std::getenv("SIMULS2S_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  KeyValueConfig c;
  c.Set("threads", v);
  const int n = c.GetInt("threads", 1);
  if (n < 1) throw UsageError("SIMULS2S_THREADS must be >= 1");
  return n;
}

std::vector<std::vector<int>> UnitCorpus(const std::vector<Utterance>& data) {
  std::vector<std::vector<int>> corpus;
  for (const auto& u : data) corpus.push_back(u.units);
  return corpus;
}

void PrintPoints(const std::vector<SweepPoint>& points) {
  std::cout << std::left << std::setw(9) << "system" << std::setw(5) << "k" << std::setw(10)
            << "BLEU" << std::setw(11) << "unitBLEU" << std::setw(10) << "AL" << std::setw(10)
            << "LAAL" << std::setw(10) << "ATD" << std::setw(10) << "Start" << "End\n";
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& p : points) {
    std::cout << std::setw(9) << p.system << std::setw(5) << p.k << std::setw(10) << p.bleu
              << std::setw(11) << p.unit_bleu << std::setw(10) << p.al_ms << std::setw(10)
              << p.laal_ms << std::setw(10) << p.atd_ms << std::setw(10) << p.start_offset_ms
              << p.end_offset_ms << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simultaneous speech-to-speech toy pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--set", overrides, "config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  std::string gen_out, gen_split = "train";
  int gen_n = 100;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--split", gen_split, "split name, part of the utterance seed");
  gen->add_option("--n", gen_n, "number of utterances");

  auto* train = app.add_subcommand("train", "train stage 1 or stage 2");
  int stage = 1;
  std::string train_data, train_out, train_init, train_mode;
  train->add_option("--stage", stage, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  train->add_option("--data", train_data, "training data directory")->required();
  train->add_option("--out", train_out, "output checkpoint")->required();
  train->add_option("--init", train_init, "stage-1 checkpoint (stage 2)");
  train->add_option("--mode", train_mode, "prompt front-end for stage 1: cif or stack16");

  auto* ngram = app.add_subcommand("ngram-train", "train the unit n-gram on target units");
  std::string ngram_data, ngram_out;
  int ngram_order = 4;
  ngram->add_option("--data", ngram_data, "training data directory")->required();
  ngram->add_option("--out", ngram_out, "output ARPA file")->required();
  ngram->add_option("--order", ngram_order, "n-gram order");

  auto* eval = app.add_subcommand("eval", "k-sweep evaluation");
  std::string eval_ckpt, eval_data, eval_out, eval_mode = "cif", eval_ngram, eval_logs;
  std::vector<int> eval_k;
  bool eval_greedy = false;
  eval->add_option("--ckpt", eval_ckpt, "stage-2 checkpoint")->required();
  eval->add_option("--data", eval_data, "test data directory")->required();
  eval->add_option("--out", eval_out, "report directory")->required();
  eval->add_option("--k", eval_k, "wait-k values")->delimiter(',');
  eval->add_option("--mode", eval_mode, "cif, stack16 or offline")
      ->check(CLI::IsMember({"cif", "stack16", "offline"}));
  eval->add_option("--ngram", eval_ngram, "unit ARPA model for shallow fusion");
  eval->add_flag("--greedy", eval_greedy, "greedy unit decoding instead of beam search");
  eval->add_option("--logs", eval_logs, "write SessionLogs to this directory");

  auto* report = app.add_subcommand("report", "merge summaries into plot data");
  std::vector<std::string> report_in;
  std::string report_out;
  report->add_option("--in", report_in, "summary.json files")->required();
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const KeyValueConfig cfg = LoadConfig(config_path, overrides);
    if (*gen) {
      const SyntheticTaskSpec spec = SyntheticTaskSpec::FromConfig(cfg);
      WriteDataset(gen_out, GenerateDataset(spec, gen_split, gen_n), spec);
      std::cout << "wrote " << gen_n << " utterances to " << gen_out << "\n";
    } else if (*train) {
      const auto data = ReadDataset(train_data);
      const TrainConfig tc = TrainConfig::FromConfig(cfg, stage);
      if (stage == 1) {
        KeyValueConfig c = cfg;
        if (!train_mode.empty()) c.Set("model.mode", train_mode);
        ModelBundle bundle(ModelConfig::FromConfig(c, ReadTaskSpec(train_data)));
        const TrainResult r = TrainStage1(bundle, data, tc);
        bundle.Save(train_out, {{"stage", 1}, {"steps", tc.steps}});
        std::cout << "stage1 loss " << r.first_loss << " -> " << r.last_loss << ", accuracy "
                  << TeacherForcedAccuracy(bundle, data);
        if (bundle.config().mode == PromptMode::kCif) {
          std::cout << ", quantity gap " << MeanQuantityGap(bundle, data);
        }
        std::cout << "\n";
      } else {
        if (train_init.empty()) throw UsageError("stage 2 needs --init");
        ModelBundle bundle = ModelBundle::Load(train_init);
        const TrainResult r = TrainStage2(bundle, data, tc);
        bundle.Save(train_out, {{"stage", 2}, {"steps", tc.steps}});
        std::cout << "stage2 loss " << r.first_loss << " -> " << r.last_loss << "\n";
      }
    } else if (*ngram) {
      const auto data = ReadDataset(ngram_data);
      const NGramModel lm =
          NGramModel::Train(UnitCorpus(data), ReadTaskSpec(ngram_data).unit_vocab, ngram_order);
      lm.SaveArpa(ngram_out);
      std::cout << "wrote " << ngram_out << "\n";
    } else if (*eval) {
      ModelBundle bundle = ModelBundle::Load(eval_ckpt);
      if (eval_mode != "offline" && ParsePromptMode(eval_mode) != bundle.config().mode) {
        throw UsageError("checkpoint was trained for mode " +
                         std::string(PromptModeName(bundle.config().mode)));
      }
      NGramModel lm;
      if (!eval_ngram.empty()) lm = NGramModel::LoadArpa(eval_ngram);
      EvalOptions opts;
      if (!eval_k.empty()) opts.k_list = eval_k;
      opts.offline = eval_mode == "offline";
      opts.threads = EnvThreads();
      opts.log_dir = eval_logs;
      opts.session.l_max_ratio = cfg.GetDouble("eval.l_max_ratio", opts.session.l_max_ratio);
      opts.session.lm_beam = cfg.GetInt("eval.lm_beam", opts.session.lm_beam);
      opts.session.ctc_beam = cfg.GetInt("eval.ctc_beam", opts.session.ctc_beam);
      opts.session.lm_weight = cfg.GetDouble("eval.lm_weight", opts.session.lm_weight);
      opts.session.greedy_units = eval_greedy;
      const EvalReport rep =
          EvaluateSweep(bundle, eval_ngram.empty() ? nullptr : &lm, ReadDataset(eval_data), opts);
      fs::create_directories(eval_out);
      WriteCsv((fs::path(eval_out) / "sessions.csv").string(), rep);
      std::ofstream((fs::path(eval_out) / "summary.json")) << ReportJson(rep).dump(2) << "\n";
      WritePlotData(eval_out, rep.points);
      PrintPoints(rep.points);
    } else if (*report) {
      std::vector<SweepPoint> points;
      for (const auto& path : report_in) {
        std::ifstream is(path);
        if (!is) throw DataError("cannot open " + path);
        try {
          for (const auto& p : nlohmann::json::parse(is).at("points"))
            points.push_back(SweepPointFromJson(p));
        } catch (const nlohmann::json::exception& e) {
          throw DataError(path + ": " + e.what());
        }
      }
      WritePlotData(report_out, points);
      PrintPoints(points);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
