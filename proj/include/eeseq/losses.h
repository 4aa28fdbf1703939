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

#ifndef EESEQ_LOSSES_H_
#define EESEQ_LOSSES_H_

#include <span>
#include <vector>

#include "eeseq/graph.h"

namespace eeseq {

// Stand-in for log(0); keeps every lattice quantity finite.
constexpr double kLogZero = -1e30;
constexpr int kBlank = 0;

double LogAdd(double a, double b);

// Collapse mapping: merge repeated labels, then drop blanks.
std::vector<int> CtcCollapse(std::span<const int> alignment);

// Minimum frame count for a CTC path: U plus one blank between each pair of
// equal adjacent labels.
std::size_t CtcMinFrames(std::span<const int> target);

// Forward lattice over the blank-interleaved target (length 2U+1).
struct AlignmentLattice {
  std::vector<int> labels;  // phi y1 phi y2 ... yU phi
  Tensor log_alpha;         // [T x (2U+1)]
  double log_likelihood = kLogZero;
};

// Throws InfeasibleTargetError if the grid has fewer frames than
// CtcMinFrames(target).
AlignmentLattice CtcForward(const Tensor& log_grid, std::span<const int> target);

// -log sum over alignments collapsing to target of prod_t P(a_t).
double CtcLossValue(const Tensor& log_grid, std::span<const int> target);
// Differentiable version; gradient w.r.t. the log grid comes from the
// forward-backward state occupancies.
Var CtcLoss(Var log_grid, std::span<const int> target);

// Test oracle: enumerates all V^T alignment strings. Refuses (ConfigError)
// beyond T=8 frames or V=5 symbols. Returns +inf when nothing collapses to
// the target.
double CtcLossBruteforce(const Tensor& log_grid, std::span<const int> target);

// Teacher-forced sequence cross-entropy. Row u of log_dists is the decoder
// distribution given gold prefix y_1..y_u; gold_cols[u] is the column of the
// next gold symbol (the last one is end-of-sequence).
Var CeSeqLoss(Var log_dists, std::span<const int> gold_cols);

struct LossConfig {
  double lambda_ctc = 0.3;
  double lambda_ce = 0.7;
  std::vector<double> exit_weights;  // empty means all ones

  // Throws ConfigError on negative or all-zero exit weights, a weight count
  // that is not num_exits, or lambdas not summing to one when AED is used.
  void Validate(std::size_t num_exits, bool uses_aed) const;
  double ExitWeight(std::size_t m) const {
    return exit_weights.empty() ? 1.0 : exit_weights[m];
  }
};

double AedLoss(double ctc, double ce, const LossConfig& cfg);
Var AedLoss(Var ctc, Var ce, const LossConfig& cfg);

// Weighted sum over exits; unit weights give the plain joint objective.
double EeJointLoss(std::span<const double> per_exit, const LossConfig& cfg);
Var EeJointLoss(std::span<const Var> per_exit, const LossConfig& cfg);

}  // namespace eeseq

#endif  // EESEQ_LOSSES_H_
