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

#include "eeseq/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eeseq/errors.h"
#include "eeseq/ops.h"

namespace eeseq {

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

std::vector<int> CtcCollapse(std::span<const int> alignment) {
  std::vector<int> out;
  int prev = -1;
  for (int a : alignment) {
    if (a != prev && a != kBlank) out.push_back(a);
    prev = a;
  }
  return out;
}

std::size_t CtcMinFrames(std::span<const int> target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

namespace {

void CheckTarget(const Tensor& log_grid, std::span<const int> target) {
  if (log_grid.rank() != 2) throw DimensionError("CTC grid must be [T x V]");
  const auto V = static_cast<int>(log_grid.cols());
  for (int y : target)
    if (y <= kBlank || y >= V)
      throw DimensionError("CTC target label " + std::to_string(y) +
                           " outside 1.." + std::to_string(V - 1));
  if (CtcMinFrames(target) > log_grid.rows())
    throw InfeasibleTargetError(
        "CTC target needs " + std::to_string(CtcMinFrames(target)) +
        " frames, grid has " + std::to_string(log_grid.rows()));
}

std::vector<int> Interleave(std::span<const int> target) {
  std::vector<int> labels(2 * target.size() + 1, kBlank);
  for (std::size_t u = 0; u < target.size(); ++u) labels[2 * u + 1] = target[u];
  return labels;
}

bool CanSkip(const std::vector<int>& labels, std::size_t s) {
  return s >= 2 && labels[s] != kBlank && labels[s] != labels[s - 2];
}

// log beta[t][s]: probability of emitting frames t+1..T-1 given state s at t.
Tensor CtcBackward(const Tensor& log_grid, const std::vector<int>& labels) {
  const std::size_t T = log_grid.rows(), S = labels.size();
  Tensor beta(Shape{T, S}, kLogZero);
  beta(T - 1, S - 1) = 0.0;
  if (S >= 2) beta(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = beta(t + 1, s) + log_grid(t + 1, labels[s]);
      if (s + 1 < S)
        acc = LogAdd(acc, beta(t + 1, s + 1) + log_grid(t + 1, labels[s + 1]));
      if (s + 2 < S && CanSkip(labels, s + 2))
        acc = LogAdd(acc, beta(t + 1, s + 2) + log_grid(t + 1, labels[s + 2]));
      beta(t, s) = std::max(acc, kLogZero);
    }
  }
  return beta;
}

}  // namespace

AlignmentLattice CtcForward(const Tensor& log_grid,
                            std::span<const int> target) {
  CheckTarget(log_grid, target);
  AlignmentLattice lat;
  lat.labels = Interleave(target);
  const std::size_t T = log_grid.rows(), S = lat.labels.size();
  lat.log_alpha = Tensor(Shape{T, S}, kLogZero);
  Tensor& alpha = lat.log_alpha;
  alpha(0, 0) = log_grid(0, kBlank);
  if (S > 1) alpha(0, 1) = log_grid(0, lat.labels[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, alpha(t - 1, s - 1));
      if (CanSkip(lat.labels, s)) acc = LogAdd(acc, alpha(t - 1, s - 2));
      alpha(t, s) = std::max(acc + log_grid(t, lat.labels[s]), kLogZero);
    }
  }
  lat.log_likelihood = alpha(T - 1, S - 1);
  if (S > 1) lat.log_likelihood = LogAdd(lat.log_likelihood, alpha(T - 1, S - 2));
  return lat;
}

double CtcLossValue(const Tensor& log_grid, std::span<const int> target) {
  return -CtcForward(log_grid, target).log_likelihood;
}

Var CtcLoss(Var log_grid, std::span<const int> target) {
  AlignmentLattice lat = CtcForward(log_grid.value(), target);
  if (!std::isfinite(lat.log_likelihood) || lat.log_likelihood <= kLogZero / 2)
    throw NumericError("CTC likelihood underflow");
  const std::size_t ig = log_grid.id();
  const double loss = -lat.log_likelihood;
  return log_grid.graph().Record(
      Tensor::Scalar(loss), {ig},
      [ig, lat = std::move(lat)](Graph& g, std::size_t self) {
        const double d = g.grad(self)[0];
        const Tensor& lp = g.value(ig);
        const Tensor beta = CtcBackward(lp, lat.labels);
        const std::size_t T = lp.rows(), V = lp.cols(), S = lat.labels.size();
        auto dg = g.grad(ig);
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t s = 0; s < S; ++s) {
            const double occ = std::exp(lat.log_alpha(t, s) + beta(t, s) -
                                        lat.log_likelihood);
            dg[t * V + lat.labels[s]] -= d * occ;
          }
      });
}

double CtcLossBruteforce(const Tensor& log_grid, std::span<const int> target) {
  const std::size_t T = log_grid.rows(), V = log_grid.cols();
  if (T > 8 || V > 5)
    throw ConfigError("brute-force CTC limited to T<=8 frames and V<=5 symbols");
  std::vector<int> want(target.begin(), target.end());
  std::vector<int> a(T, 0);
  double total = 0.0;
  while (true) {
    if (CtcCollapse(a) == want) {
      double p = 1.0;
      for (std::size_t t = 0; t < T; ++t) p *= std::exp(log_grid(t, a[t]));
      total += p;
    }
    std::size_t t = 0;
    while (t < T && ++a[t] == static_cast<int>(V)) a[t++] = 0;
    if (t == T) break;
  }
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

Var CeSeqLoss(Var log_dists, std::span<const int> gold_cols) {
  if (log_dists.rows() != gold_cols.size())
    throw DimensionError("ce_seq_loss: " + std::to_string(log_dists.rows()) +
                         " decoder steps for " +
                         std::to_string(gold_cols.size()) + " gold symbols");
  return Scale(Sum(SelectPerRow(log_dists, gold_cols)), -1.0);
}

void LossConfig::Validate(std::size_t num_exits, bool uses_aed) const {
  if (!exit_weights.empty()) {
    if (exit_weights.size() != num_exits)
      throw ConfigError("loss.exit_weights has " +
                        std::to_string(exit_weights.size()) + " entries for " +
                        std::to_string(num_exits) + " exits");
    bool any = false;
    for (double w : exit_weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw ConfigError("loss.exit_weights must be finite and >= 0");
      any = any || w > 0.0;
    }
    if (!any) throw ConfigError("loss.exit_weights are all zero");
  }
  if (lambda_ctc < 0.0 || lambda_ce < 0.0)
    throw ConfigError("loss lambdas must be >= 0");
  if (uses_aed && std::abs(lambda_ctc + lambda_ce - 1.0) > 1e-12)
    throw ConfigError("loss.lambda_ctc + loss.lambda_ce must equal 1");
}

double AedLoss(double ctc, double ce, const LossConfig& cfg) {
  if (!std::isfinite(ctc) || !std::isfinite(ce))
    throw NumericError("aed_loss: non-finite component");
  return cfg.lambda_ctc * ctc + cfg.lambda_ce * ce;
}

Var AedLoss(Var ctc, Var ce, const LossConfig& cfg) {
  AedLoss(ctc.value()[0], ce.value()[0], cfg);
  const Var parts[] = {ctc, ce};
  const double w[] = {cfg.lambda_ctc, cfg.lambda_ce};
  return WeightedSum(parts, w);
}

double EeJointLoss(std::span<const double> per_exit, const LossConfig& cfg) {
  if (per_exit.empty()) throw DimensionError("ee_joint_loss needs >= 1 exit");
  double s = 0.0;
  for (std::size_t m = 0; m < per_exit.size(); ++m)
    s += cfg.ExitWeight(m) * per_exit[m];
  return s;
}

Var EeJointLoss(std::span<const Var> per_exit, const LossConfig& cfg) {
  if (per_exit.empty()) throw DimensionError("ee_joint_loss needs >= 1 exit");
  std::vector<double> w(per_exit.size());
  for (std::size_t m = 0; m < w.size(); ++m) w[m] = cfg.ExitWeight(m);
  return WeightedSum(per_exit, w);
}

}  // namespace eeseq
