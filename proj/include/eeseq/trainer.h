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

#ifndef EESEQ_TRAINER_H_
#define EESEQ_TRAINER_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eeseq/config.h"
#include "eeseq/corpus.h"
#include "eeseq/encoder.h"
#include "eeseq/losses.h"

namespace eeseq {

// Per-utterance training objective: for each exit, CTC (CTC exits) or the
// lambda-weighted CTC + cross-entropy mix (AED exits); then the exit-weighted
// sum. Throws InfeasibleTargetError if some exit grid is too short.
struct UtteranceLoss {
  Var total;
  std::vector<double> per_exit;
};
UtteranceLoss ComputeUtteranceLoss(EarlyExitEncoder& model, Graph& g,
                                   const FeatureUtterance& utt,
                                   const LossConfig& loss);

// Adam with linear warmup; state is keyed by parameter name.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const OptimizerConfig& cfg) : cfg_(cfg) {}

  double LearningRate(int step) const;  // step counts from 1
  // Applies one update from the current gradients (clipped by global norm
  // if configured). Returns the pre-clipping gradient norm.
  double Step(ParamStore& params);
  int steps_taken() const { return step_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  OptimizerConfig cfg_;
  std::map<std::string, Moments> state_;
  int step_ = 0;
};

struct TraceEntry {
  int step = 0;
  int exit = 0;  // 1..M, or 0 for the combined objective
  double loss = 0.0;
};

struct TrainResult {
  std::vector<TraceEntry> trace;
  std::size_t skipped_infeasible = 0;
  // Batch-mean combined loss per step.
  std::vector<double> combined;
};

// Mini-batch training on `train_set`, updating `model` in place. Batches
// walk a seeded shuffle of the set, reshuffled every epoch. Utterances with
// infeasible targets are skipped and counted. Throws NumericError naming
// the step on a non-finite loss.
TrainResult Train(EarlyExitEncoder& model,
                  std::span<const FeatureUtterance* const> train_set,
                  const LossConfig& loss, const OptimizerConfig& opt);

// CSV: step,exit,loss (exit 0 is the combined objective).
void WriteTraceCsv(std::ostream& os, std::span<const TraceEntry> trace);

}  // namespace eeseq

#endif  // EESEQ_TRAINER_H_
