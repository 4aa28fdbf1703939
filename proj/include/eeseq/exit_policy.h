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

#ifndef EESEQ_EXIT_POLICY_H_
#define EESEQ_EXIT_POLICY_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eeseq/decoding.h"
#include "eeseq/tensor.h"

namespace eeseq {

// Exits are numbered from 1 (shallowest) to M (deepest) throughout this
// module and in every report.

enum class ExitMetric { kEntropy, kConfidence };

std::string MetricName(ExitMetric m);
ExitMetric ParseMetric(const std::string& s);

// Average framewise entropy in nats, normalized by frame count T and by the
// size V of the output distribution (blank included):
//   -1/(T V) sum_t sum_y P log P, with 0 log 0 = 0.
// Lies in [0, ln(V) / V].
double FrameEntropy(const Tensor& log_grid);

// Softmax weight of the top hypothesis among the returned N-best scores.
// 1 for a single hypothesis.
double SentenceConfidence(const NBestList& nbest);

struct ExitScore {
  int exit = 0;
  double entropy = 0.0;
  double confidence = 1.0;

  double value(ExitMetric m) const {
    return m == ExitMetric::kEntropy ? entropy : confidence;
  }
};

struct ExitPolicy {
  ExitMetric metric = ExitMetric::kEntropy;
  double threshold = 0.0;
  std::optional<int> max_exit_cap;  // deepest exit allowed (resource limit)

  // Entropy must be strictly below, confidence strictly above the threshold.
  bool Accepts(const ExitScore& s) const;
};

struct ExitDecision {
  int exit = 0;
  double metric_value = 0.0;
  bool fell_back = false;  // no exit passed; deepest allowed exit used
  Hypothesis hypothesis;   // filled by callers that decode
};

// First exit (in depth order, up to the cap) accepted by the policy; falls
// back to the deepest allowed exit. Throws ConfigError when the cap leaves
// no candidate.
ExitDecision SelectExit(std::span<const ExitScore> scores,
                        const ExitPolicy& policy);

// Everything a threshold sweep needs about one utterance, computed once:
// per-exit scores and the edit count of each exit's 1-best hypothesis.
struct UtteranceExitRecord {
  std::vector<ExitScore> scores;
  std::vector<std::size_t> edits;
  std::size_t ref_len = 0;
};

struct SweepRow {
  ExitMetric metric = ExitMetric::kEntropy;
  double threshold = 0.0;
  double avg_exit = 0.0;
  double wer = 0.0;
  double avg_layers_executed = 0.0;
};

// exit_layers maps exit number m to its encoder layer (exit_layers[m-1]).
std::vector<SweepRow> SweepThresholds(
    std::span<const UtteranceExitRecord> records, ExitMetric metric,
    std::span<const double> thresholds, std::span<const int> exit_layers);

// Threshold grid spanning the observed metric values: the two extremes that
// force the first and the last exit, plus midpoints between quantiles.
std::vector<double> DefaultThresholdGrid(
    std::span<const UtteranceExitRecord> records, ExitMetric metric,
    std::size_t interior_points);

// CSV: metric,threshold,avg_exit,wer,avg_layers_executed (6 significant
// digits).
void WriteSweepCsv(std::ostream& os, std::span<const SweepRow> rows,
                   bool header = true);

}  // namespace eeseq

#endif  // EESEQ_EXIT_POLICY_H_
