// Copyright 2026  The eeseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// eeseq: early-exit sequence recognition experiments.
//
//   eeseq gen-corpus --config exp.conf --out corpus.txt
//   eeseq train      --config exp.conf --corpus corpus.txt --out model.bin
//   eeseq eval       --config exp.conf --corpus corpus.txt --model model.bin
//   eeseq sweep      --config exp.conf ... --metric entropy --out sweep.csv
//   eeseq infer      --config exp.conf ... --mode result --threshold 0.05
//   eeseq compare    --config exp.conf --out compare.csv

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eeseq/config.h"
#include "eeseq/corpus.h"
#include "eeseq/encoder.h"
#include "eeseq/errors.h"
#include "eeseq/evaluation.h"
#include "eeseq/exit_policy.h"
#include "eeseq/experiment.h"
#include "eeseq/trainer.h"

namespace {

using namespace eeseq;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string corpus;
  std::string model;
  std::string out;
  std::string split = "test";
};

ExperimentConfig LoadConfig(const CommonOptions& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return LoadConfigFile(o.config, overrides);
}

SyntheticCorpus LoadOrGenerateCorpus(const CommonOptions& o,
                                     const ExperimentConfig& cfg) {
  SyntheticCorpus corpus = o.corpus.empty()
                               ? GenerateCorpus(cfg.corpus, cfg.corpus_seed)
                               : ReadCorpusFile(o.corpus);
  if (corpus.vocab_size != cfg.encoder.vocab_size ||
      corpus.feature_dim != cfg.encoder.input_dim)
    throw ConfigError("corpus vocabulary/dimension do not match the config");
  return corpus;
}

EarlyExitEncoder LoadModel(const CommonOptions& o, const ExperimentConfig& cfg) {
  if (o.model.empty()) throw ConfigError("--model is required");
  return EarlyExitEncoder(cfg.encoder, ParamStore::LoadFile(o.model));
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  return os;
}

void AddCommon(CLI::App* cmd, CommonOptions& o, bool corpus, bool model) {
  cmd->add_option("-c,--config", o.config, "Experiment config (key = value)");
  cmd->add_option("--set", o.sets, "Override a config key (key=value)");
  if (corpus)
    cmd->add_option("--corpus", o.corpus,
                    "Corpus file (default: generate from config)");
  if (model) {
    cmd->add_option("--model", o.model, "Parameter snapshot")->required();
    cmd->add_option("--split", o.split, "Evaluation split")
        ->check(CLI::IsMember({"train", "dev", "test"}));
  }
}

int RunShowConfig(const CommonOptions& o) {
  WriteConfig(std::cout, LoadConfig(o));
  return 0;
}

int RunGenCorpus(const CommonOptions& o) {
  const ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
  WriteCorpusFile(o.out, corpus);
  std::printf("wrote %zu utterances (vocab %d, dim %d) to %s\n",
              corpus.utterances.size(), corpus.vocab_size, corpus.feature_dim,
              o.out.c_str());
  return 0;
}

int RunTrain(const CommonOptions& o, const std::string& trace_path) {
  const ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = LoadOrGenerateCorpus(o, cfg);
  TrainedModel tm = TrainModel(cfg, corpus);
  tm.model.params().SaveFile(o.out);
  if (!trace_path.empty()) {
    auto os = OpenOut(trace_path);
    WriteTraceCsv(os, tm.result.trace);
  }
  const auto& c = tm.result.combined;
  std::printf("trained %zu steps, %zu parameters; final loss %.4f; "
              "skipped %zu infeasible utterances\n",
              c.size(), tm.model.params().NumScalars(), c.empty() ? 0.0 : c.back(),
              tm.result.skipped_infeasible);
  return 0;
}

int RunEval(const CommonOptions& o) {
  const ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = LoadOrGenerateCorpus(o, cfg);
  EarlyExitEncoder model = LoadModel(o, cfg);
  const auto utts = corpus.Select(ParseSplit(o.split));
  const auto wer = PerExitWer(DecodeAllExits(model, utts, cfg.decode));
  if (!o.out.empty()) {
    auto os = OpenOut(o.out);
    WriteWerCsv(os, wer, cfg.encoder.exit_layers);
  }
  std::printf("%-6s %-6s %s\n", "exit", "layer", "WER");
  for (std::size_t m = 0; m < wer.size(); ++m)
    std::printf("%-6zu %-6d %.2f%%\n", m + 1, cfg.encoder.exit_layers[m],
                100.0 * wer[m]);
  return 0;
}

int RunSweep(const CommonOptions& o, const std::string& metric_arg) {
  const ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = LoadOrGenerateCorpus(o, cfg);
  EarlyExitEncoder model = LoadModel(o, cfg);
  const auto utts = corpus.Select(ParseSplit(o.split));
  const auto records = ToSweepRecords(DecodeAllExits(model, utts, cfg.decode));
  std::vector<ExitMetric> metrics;
  if (metric_arg == "both")
    metrics = {ExitMetric::kEntropy, ExitMetric::kConfidence};
  else
    metrics = {metric_arg.empty() ? cfg.policy.metric : ParseMetric(metric_arg)};

  std::vector<SweepRow> rows;
  for (ExitMetric m : metrics) {
    std::vector<double> grid = cfg.policy.thresholds;
    if (grid.empty() || metrics.size() > 1)
      grid = DefaultThresholdGrid(records, m,
                                  static_cast<std::size_t>(cfg.policy.grid_points));
    const auto part = SweepThresholds(records, m, grid, cfg.encoder.exit_layers);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (!o.out.empty()) {
    auto os = OpenOut(o.out);
    WriteSweepCsv(os, rows);
  }
  WriteSweepCsv(std::cout, rows);
  return 0;
}

int RunInfer(const CommonOptions& o, const std::string& mode,
             std::optional<int> cap, const std::string& metric,
             std::optional<double> threshold) {
  const ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = LoadOrGenerateCorpus(o, cfg);
  EarlyExitEncoder model = LoadModel(o, cfg);
  const auto utts = corpus.Select(ParseSplit(o.split));
  ExitPolicy policy;
  policy.metric = metric.empty() ? cfg.policy.metric : ParseMetric(metric);
  policy.threshold = threshold ? *threshold : cfg.policy.threshold;
  policy.max_exit_cap = cap;
  const InferMode m = ParseInferMode(mode);
  std::vector<InferenceResult> results(utts.size());
  ParallelFor(utts.size(), [&](std::size_t i) {
    results[i] = Infer(model, *utts[i], m, policy, cfg.decode);
  });
  if (!o.out.empty()) {
    auto os = OpenOut(o.out);
    WriteInferCsv(os, results, utts);
  }
  std::vector<EditStats> edits;
  double exits = 0, layers = 0;
  int max_layers = 0;
  for (const auto& r : results) {
    edits.push_back(r.edits);
    exits += r.decision.exit;
    layers += r.layers_executed;
    max_layers = std::max(max_layers, r.layers_executed);
  }
  const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
  std::printf("mode %s metric %s threshold %g cap %s\n", mode.c_str(),
              MetricName(policy.metric).c_str(), policy.threshold,
              cap ? std::to_string(*cap).c_str() : "none");
  std::printf("utterances %zu  avg_exit %.4f  avg_layers_executed %.4f  "
              "max_layers_executed %d  WER %.2f%%\n",
              results.size(), exits / n, layers / n, max_layers,
              results.empty() ? 0.0 : 100.0 * CorpusWer(edits));
  return 0;
}

int RunCompare(const CommonOptions& o) {
  ExperimentConfig cfg = LoadConfig(o);
  const SyntheticCorpus corpus = LoadOrGenerateCorpus(o, cfg);
  std::ofstream os;
  if (!o.out.empty()) os = OpenOut(o.out);
  bool header = true;
  for (std::uint64_t seed : cfg.compare_seeds) {
    const auto rows = RunEeVsNoEe(cfg, corpus, seed);
    std::printf("seed %llu\n%-6s %-8s %s\n",
                static_cast<unsigned long long>(seed), "layer", "no-EE", "EE");
    for (const auto& r : rows) {
      char noee[32] = "--";
      if (r.noee_wer) std::snprintf(noee, sizeof(noee), "%.2f", 100 * *r.noee_wer);
      std::printf("%-6d %-8s %.2f\n", r.layer, noee, 100 * r.ee_wer);
    }
    if (os.is_open()) {
      // One table per seed; the header appears once when a single seed runs.
      if (!header) os << "# seed " << seed << '\n';
      std::ostringstream table;
      WriteComparisonCsv(table, rows);
      std::string text = table.str();
      if (!header) text = text.substr(text.find('\n') + 1);
      if (header && cfg.compare_seeds.size() > 1)
        text.insert(text.find('\n') + 1, "# seed " + std::to_string(seed) + "\n");
      os << text;
      header = false;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-exit sequence recognition experiments"};
  app.require_subcommand(1);

  CommonOptions show_o, gen_o, train_o, eval_o, sweep_o, infer_o, cmp_o;
  std::string trace_path, sweep_metric, infer_mode = "result", infer_metric;
  std::optional<int> cap;
  std::optional<double> threshold;

  auto* show = app.add_subcommand("show-config",
                                  "Print the effective config (all keys)");
  AddCommon(show, show_o, false, false);

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus");
  AddCommon(gen, gen_o, false, false);
  gen->add_option("-o,--out", gen_o.out, "Corpus file")->required();

  auto* train = app.add_subcommand("train", "Train an early-exit model");
  AddCommon(train, train_o, true, false);
  train->add_option("-o,--out", train_o.out, "Snapshot file")->required();
  train->add_option("--trace", trace_path, "Loss trace CSV (step,exit,loss)");

  auto* eval = app.add_subcommand("eval", "Per-exit WER");
  AddCommon(eval, eval_o, true, true);
  eval->add_option("-o,--out", eval_o.out, "CSV (exit,layer,wer)");

  auto* sweep = app.add_subcommand("sweep", "Exit-selection threshold sweep");
  AddCommon(sweep, sweep_o, true, true);
  sweep->add_option("-o,--out", sweep_o.out, "Sweep CSV");
  sweep->add_option("--metric", sweep_metric, "entropy, confidence or both")
      ->check(CLI::IsMember({"entropy", "confidence", "both"}));

  auto* infer = app.add_subcommand("infer", "Dynamic early-exit inference");
  AddCommon(infer, infer_o, true, true);
  infer->add_option("-o,--out", infer_o.out, "Per-utterance CSV");
  infer->add_option("--mode", infer_mode, "resource or result")
      ->check(CLI::IsMember({"resource", "result"}));
  infer->add_option("--cap", cap, "Deepest exit allowed (1-based)");
  infer->add_option("--metric", infer_metric, "entropy or confidence")
      ->check(CLI::IsMember({"entropy", "confidence"}));
  infer->add_option("--threshold", threshold, "Exit selection threshold");

  auto* cmp = app.add_subcommand("compare", "EE vs single-exit comparison");
  AddCommon(cmp, cmp_o, true, false);
  cmp->add_option("-o,--out", cmp_o.out, "CSV (layer,noee_wer,ee_wer)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*show) return RunShowConfig(show_o);
    if (*gen) return RunGenCorpus(gen_o);
    if (*train) return RunTrain(train_o, trace_path);
    if (*eval) return RunEval(eval_o);
    if (*sweep) return RunSweep(sweep_o, sweep_metric);
    if (*infer) return RunInfer(infer_o, infer_mode, cap, infer_metric, threshold);
    if (*cmp) return RunCompare(cmp_o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eeseq: %s\n", e.what());
    return 1;
  }
  return 2;
}
