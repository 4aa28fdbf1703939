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

#include "eeseq/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>

#include "eeseq/errors.h"
#include "eeseq/rng.h"

namespace eeseq {

UtteranceLoss ComputeUtteranceLoss(EarlyExitEncoder& model, Graph& g,
                                   const FeatureUtterance& utt,
                                   const LossConfig& loss) {
  const EncoderConfig& cfg = model.config();
  ExitOutputs outs = model.EncodeWithTaps(g, utt.features);
  std::vector<Var> per_exit_vars;
  UtteranceLoss out;
  for (const ExitOutput& e : outs.exits) {
    Var ctc = CtcLoss(e.log_grid, utt.tokens);
    Var l = ctc;
    if (cfg.head_kind(e.exit_index) == HeadKind::kAed) {
      std::vector<int> inputs = {cfg.eos()};
      std::vector<int> gold;
      for (int t : utt.tokens) {
        inputs.push_back(t);
        gold.push_back(TokenToDecoderColumn(t));
      }
      gold.push_back(TokenToDecoderColumn(cfg.eos()));
      Var dists = model.DecoderForward(g, e.exit_index, e.states, inputs);
      l = AedLoss(ctc, CeSeqLoss(dists, gold), loss);
    }
    per_exit_vars.push_back(l);
    out.per_exit.push_back(l.value()[0]);
  }
  out.total = EeJointLoss(per_exit_vars, loss);
  return out;
}

double AdamOptimizer::LearningRate(int step) const {
  if (cfg_.warmup_steps > 0 && step < cfg_.warmup_steps)
    return cfg_.learning_rate * static_cast<double>(step) /
           static_cast<double>(cfg_.warmup_steps);
  return cfg_.learning_rate;
}

double AdamOptimizer::Step(ParamStore& params) {
  ++step_;
  double sq = 0.0;
  params.ForEach([&](const Parameter& p) {
    for (double g : p.grad.data()) sq += g * g;
  });
  const double norm = std::sqrt(sq);
  const double clip =
      (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm : 1.0;
  const double lr = LearningRate(step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
  params.ForEach([&](Parameter& p) {
    Moments& st = state_[p.name];
    if (st.m.empty()) {
      st.m.assign(p.value.size(), 0.0);
      st.v.assign(p.value.size(), 0.0);
    }
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] * clip;
      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * gi;
      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  });
  return norm;
}

TrainResult Train(EarlyExitEncoder& model,
                  std::span<const FeatureUtterance* const> train_set,
                  const LossConfig& loss, const OptimizerConfig& opt) {
  const std::size_t M = model.config().num_exits();
  loss.Validate(M, model.config().uses_aed());
  if (train_set.empty()) throw ConfigError("training set is empty");
  TrainResult result;
  AdamOptimizer adam(opt);
  Rng rng(opt.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  Graph g;

  for (int step = 1; step <= opt.steps; ++step) {
    model.params().ZeroGrad();
    std::vector<double> exit_sum(M, 0.0);
    double total_sum = 0.0;
    int used = 0;
    for (int b = 0; b < opt.batch_size; ++b) {
      if (cursor == order.size()) {
        // Fisher-Yates with our own generator for portability.
        for (std::size_t i = order.size(); i > 1; --i) {
          const auto j = static_cast<std::size_t>(rng.NextU64() % i);
          std::swap(order[i - 1], order[j]);
        }
        cursor = 0;
      }
      const FeatureUtterance& utt = *train_set[order[cursor++]];
      g.Reset();
      UtteranceLoss ul;
      try {
        ul = ComputeUtteranceLoss(model, g, utt, loss);
      } catch (const InfeasibleTargetError&) {
        ++result.skipped_infeasible;
        continue;
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) +
                           ": " + e.what());
      }
      const double total = ul.total.value()[0];
      if (!std::isfinite(total))
        throw NumericError("training diverged at step " + std::to_string(step));
      g.Backward(ul.total);
      for (std::size_t m = 0; m < M; ++m) exit_sum[m] += ul.per_exit[m];
      total_sum += total;
      ++used;
    }
    if (used == 0) {
      result.combined.push_back(std::nan(""));
      continue;
    }
    const double inv = 1.0 / used;
    model.params().ForEach([&](Parameter& p) {
      for (double& v : p.grad.data()) v *= inv;
    });
    adam.Step(model.params());
    for (std::size_t m = 0; m < M; ++m)
      result.trace.push_back({step, static_cast<int>(m + 1), exit_sum[m] * inv});
    result.trace.push_back({step, 0, total_sum * inv});
    result.combined.push_back(total_sum * inv);
    if (opt.log_every > 0 && step % opt.log_every == 0)
      std::fprintf(stderr, "step %d loss %.4f\n", step, total_sum * inv);
  }
  if (result.skipped_infeasible > 0)
    std::fprintf(stderr, "warning: skipped %zu utterances with infeasible targets\n",
                 result.skipped_infeasible);
  return result;
}

void WriteTraceCsv(std::ostream& os, std::span<const TraceEntry> trace) {
  os << "step,exit,loss\n";
  char buf[96];
  for (const TraceEntry& e : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g\n", e.step, e.exit, e.loss);
    os << buf;
  }
}

}  // namespace eeseq
