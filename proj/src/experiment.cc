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

#include "eeseq/experiment.h"

#include <cstdio>
#include <ostream>

#include "eeseq/errors.h"
#include "eeseq/evaluation.h"

namespace eeseq {

ExperimentConfig SingleExitConfig(const ExperimentConfig& cfg, int depth) {
  std::size_t exit = cfg.encoder.num_exits();
  for (std::size_t m = 0; m < cfg.encoder.num_exits(); ++m)
    if (cfg.encoder.exit_layers[m] == depth) exit = m;
  if (exit == cfg.encoder.num_exits())
    throw ConfigError("no exit at layer " + std::to_string(depth));
  ExperimentConfig out = cfg;
  out.encoder.num_layers = depth;
  out.encoder.exit_layers = {depth};
  out.encoder.head_kinds.clear();
  if (!cfg.encoder.head_kinds.empty())
    out.encoder.head_kinds = {cfg.encoder.head_kinds[exit]};
  out.loss.exit_weights.clear();
  out.noee_depths.clear();
  out.Finalize();
  return out;
}

ExperimentConfig WithSeed(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentConfig out = cfg;
  out.encoder.seed = seed;
  out.train.seed = seed;
  return out;
}

TrainedModel TrainModel(const ExperimentConfig& cfg,
                        const SyntheticCorpus& corpus) {
  TrainedModel tm{EarlyExitEncoder(cfg.encoder), {}};
  const auto train = corpus.Select(Split::kTrain);
  tm.result = Train(tm.model, train, cfg.loss, cfg.train);
  return tm;
}

std::vector<ComparisonRow> RunEeVsNoEe(const ExperimentConfig& cfg,
                                       const SyntheticCorpus& corpus,
                                       std::uint64_t seed, Split split) {
  const ExperimentConfig base = WithSeed(cfg, seed);
  const auto eval_set = corpus.Select(split);
  TrainedModel ee = TrainModel(base, corpus);
  const std::vector<double> ee_wer =
      PerExitWer(DecodeAllExits(ee.model, eval_set, base.decode));

  std::vector<ComparisonRow> rows;
  for (std::size_t m = 0; m < base.encoder.num_exits(); ++m)
    rows.push_back({base.encoder.exit_layers[m], std::nullopt, ee_wer[m]});

  const std::vector<int> depths =
      base.noee_depths.empty() ? base.encoder.exit_layers : base.noee_depths;
  for (int depth : depths) {
    TrainedModel single = TrainModel(SingleExitConfig(base, depth), corpus);
    const double wer =
        PerExitWer(DecodeAllExits(single.model, eval_set, base.decode))[0];
    for (ComparisonRow& r : rows)
      if (r.layer == depth) r.noee_wer = wer;
  }
  return rows;
}

void WriteComparisonCsv(std::ostream& os, std::span<const ComparisonRow> rows) {
  os << "layer,noee_wer,ee_wer\n";
  char buf[64];
  for (const ComparisonRow& r : rows) {
    os << r.layer << ',';
    if (r.noee_wer) {
      std::snprintf(buf, sizeof(buf), "%.6g", *r.noee_wer);
      os << buf;
    } else {
      os << "--";
    }
    std::snprintf(buf, sizeof(buf), "%.6g", r.ee_wer);
    os << ',' << buf << '\n';
  }
}

}  // namespace eeseq
