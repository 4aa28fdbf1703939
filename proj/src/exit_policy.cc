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

#include "eeseq/exit_policy.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "eeseq/errors.h"

namespace eeseq {

std::string MetricName(ExitMetric m) {
  return m == ExitMetric::kEntropy ? "entropy" : "confidence";
}

ExitMetric ParseMetric(const std::string& s) {
  if (s == "entropy") return ExitMetric::kEntropy;
  if (s == "confidence") return ExitMetric::kConfidence;
  throw ConfigError("unknown metric '" + s + "' (expected entropy or confidence)");
}

double FrameEntropy(const Tensor& log_grid) {
  const std::size_t T = log_grid.rows(), V = log_grid.cols();
  if (T == 0 || V == 0) throw DimensionError("frame_entropy of empty grid");
  double acc = 0.0;
  for (double lp : log_grid.data()) {
    const double p = std::exp(lp);
    if (p > 0.0) acc -= p * lp;
  }
  // Rounding on one-hot rows can leave a tiny negative sum.
  return std::max(acc, 0.0) / (static_cast<double>(T) * static_cast<double>(V));
}

double SentenceConfidence(const NBestList& nbest) {
  if (nbest.empty()) throw DimensionError("sentence_confidence of empty list");
  double top = nbest.hypotheses.front().score;
  double best = top;
  for (const Hypothesis& h : nbest.hypotheses) best = std::max(best, h.score);
  double denom = 0.0;
  for (const Hypothesis& h : nbest.hypotheses) denom += std::exp(h.score - best);
  return std::exp(top - best) / denom;
}

bool ExitPolicy::Accepts(const ExitScore& s) const {
  return metric == ExitMetric::kEntropy ? s.entropy < threshold
                                        : s.confidence > threshold;
}

ExitDecision SelectExit(std::span<const ExitScore> scores,
                        const ExitPolicy& policy) {
  const ExitScore* last_allowed = nullptr;
  for (const ExitScore& s : scores) {
    if (policy.max_exit_cap && s.exit > *policy.max_exit_cap) break;
    last_allowed = &s;
    if (policy.Accepts(s))
      return ExitDecision{s.exit, s.value(policy.metric), false, {}};
  }
  if (!last_allowed)
    throw ConfigError("exit cap leaves no exit to choose from");
  return ExitDecision{last_allowed->exit, last_allowed->value(policy.metric),
                      true, {}};
}

std::vector<SweepRow> SweepThresholds(
    std::span<const UtteranceExitRecord> records, ExitMetric metric,
    std::span<const double> thresholds, std::span<const int> exit_layers) {
  if (records.empty()) throw DimensionError("sweep over an empty set");
  std::vector<SweepRow> rows;
  for (double th : thresholds) {
    ExitPolicy policy{metric, th, std::nullopt};
    double exit_sum = 0.0, layer_sum = 0.0;
    std::size_t edits = 0, ref = 0;
    for (const UtteranceExitRecord& r : records) {
      const ExitDecision d = SelectExit(r.scores, policy);
      exit_sum += d.exit;
      layer_sum += exit_layers[static_cast<std::size_t>(d.exit - 1)];
      edits += r.edits[static_cast<std::size_t>(d.exit - 1)];
      ref += r.ref_len;
    }
    const double n = static_cast<double>(records.size());
    rows.push_back({metric, th, exit_sum / n,
                    ref ? static_cast<double>(edits) / static_cast<double>(ref)
                        : 0.0,
                    layer_sum / n});
  }
  return rows;
}

std::vector<double> DefaultThresholdGrid(
    std::span<const UtteranceExitRecord> records, ExitMetric metric,
    std::size_t interior_points) {
  std::vector<double> values;
  for (const UtteranceExitRecord& r : records)
    for (const ExitScore& s : r.scores) values.push_back(s.value(metric));
  std::sort(values.begin(), values.end());
  std::vector<double> grid;
  if (!values.empty())
    for (std::size_t i = 1; i <= interior_points; ++i) {
      const std::size_t q = i * (values.size() - 1) / (interior_points + 1);
      grid.push_back(values[q]);
    }
  if (metric == ExitMetric::kEntropy) {
    grid.push_back(0.0);
    grid.push_back(std::numeric_limits<double>::infinity());
  } else {
    grid.push_back(0.0);
    grid.push_back(1.0);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

void WriteSweepCsv(std::ostream& os, std::span<const SweepRow> rows,
                   bool header) {
  if (header) os << "metric,threshold,avg_exit,wer,avg_layers_executed\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g\n",
                  MetricName(r.metric).c_str(), r.threshold, r.avg_exit, r.wer,
                  r.avg_layers_executed);
    os << buf;
  }
}

}  // namespace eeseq
