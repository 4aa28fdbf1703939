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

#ifndef EESEQ_EXPERIMENT_H_
#define EESEQ_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "eeseq/config.h"
#include "eeseq/corpus.h"
#include "eeseq/encoder.h"
#include "eeseq/trainer.h"

namespace eeseq {

// Same hyperparameters truncated to `depth` blocks with a single exit there.
ExperimentConfig SingleExitConfig(const ExperimentConfig& cfg, int depth);

// Applies a run seed to both parameter init and batch order.
ExperimentConfig WithSeed(const ExperimentConfig& cfg, std::uint64_t seed);

struct TrainedModel {
  EarlyExitEncoder model;
  TrainResult result;
};

TrainedModel TrainModel(const ExperimentConfig& cfg,
                        const SyntheticCorpus& corpus);

struct ComparisonRow {
  int layer = 0;
  std::optional<double> noee_wer;  // only at trained single-exit depths
  double ee_wer = 0.0;
};

// One early-exit model (all exits, joint loss) and one single-exit model per
// no-EE depth, with equal step budgets and the same seed; WER per exit on
// the given split.
std::vector<ComparisonRow> RunEeVsNoEe(const ExperimentConfig& cfg,
                                       const SyntheticCorpus& corpus,
                                       std::uint64_t seed,
                                       Split split = Split::kTest);

// CSV: layer,noee_wer,ee_wer ("--" where no single-exit model exists).
void WriteComparisonCsv(std::ostream& os, std::span<const ComparisonRow> rows);

}  // namespace eeseq

#endif  // EESEQ_EXPERIMENT_H_
