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

#include "eeseq/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "eeseq/errors.h"

namespace eeseq {

void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<UtteranceDecode> DecodeAllExits(
    EarlyExitEncoder& model, std::span<const FeatureUtterance* const> utts,
    const DecodeOptions& opts) {
  std::vector<UtteranceDecode> out(utts.size());
  ParallelFor(utts.size(), [&](std::size_t i) {
    const FeatureUtterance& u = *utts[i];
    Graph g;
    ExitOutputs outs = model.EncodeWithTaps(g, u.features);
    UtteranceDecode& d = out[i];
    for (const ExitOutput& e : outs.exits) {
      const Tensor& grid = e.log_grid.value();
      NBestList nbest =
          DecodeExit(model, e.exit_index, grid, e.states.value(), opts);
      ExitScore s;
      s.exit = static_cast<int>(e.exit_index) + 1;
      s.entropy = FrameEntropy(grid);
      s.confidence = SentenceConfidence(nbest);
      d.scores.push_back(s);
      d.best.push_back(nbest.best());
      d.edits.push_back(AlignWords<int>(u.tokens, nbest.best().tokens));
    }
  });
  return out;
}

std::vector<double> PerExitWer(std::span<const UtteranceDecode> decodes) {
  if (decodes.empty()) throw DimensionError("WER over an empty set");
  const std::size_t M = decodes.front().edits.size();
  std::vector<double> wer(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<EditStats> per;
    per.reserve(decodes.size());
    for (const UtteranceDecode& d : decodes) per.push_back(d.edits[m]);
    wer[m] = CorpusWer(per);
  }
  return wer;
}

double EvaluateWer(EarlyExitEncoder& model,
                   std::span<const FeatureUtterance* const> utts, int exit,
                   const DecodeOptions& opts) {
  if (exit < 1 || static_cast<std::size_t>(exit) > model.config().num_exits())
    throw ConfigError("exit " + std::to_string(exit) + " does not exist");
  const auto decodes = DecodeAllExits(model, utts, opts);
  return PerExitWer(decodes)[static_cast<std::size_t>(exit - 1)];
}

std::vector<UtteranceExitRecord> ToSweepRecords(
    std::span<const UtteranceDecode> decodes) {
  std::vector<UtteranceExitRecord> out;
  out.reserve(decodes.size());
  for (const UtteranceDecode& d : decodes) {
    UtteranceExitRecord r;
    r.scores = d.scores;
    for (const EditStats& e : d.edits) r.edits.push_back(e.errors());
    r.ref_len = d.edits.empty() ? 0 : d.edits.front().ref_words;
    out.push_back(std::move(r));
  }
  return out;
}

InferMode ParseInferMode(const std::string& s) {
  if (s == "resource") return InferMode::kResource;
  if (s == "result") return InferMode::kResult;
  throw ConfigError("unknown mode '" + s + "' (expected resource or result)");
}

InferenceResult Infer(EarlyExitEncoder& model, const FeatureUtterance& utt,
                      InferMode mode, const ExitPolicy& policy,
                      const DecodeOptions& opts) {
  const EncoderConfig& cfg = model.config();
  const int M = static_cast<int>(cfg.num_exits());
  const int top = policy.max_exit_cap ? *policy.max_exit_cap : M;
  if (top < 1 || top > M)
    throw ConfigError("exit cap " + std::to_string(top) + " outside 1.." +
                      std::to_string(M));
  Graph g;
  IncrementalEncoder inc(model, g, utt.features);
  InferenceResult res;
  res.id = utt.id;
  auto finish = [&](const ExitOutput& e, const NBestList& nbest, double value,
                    bool fell_back) {
    res.decision.exit = static_cast<int>(e.exit_index) + 1;
    res.decision.metric_value = value;
    res.decision.fell_back = fell_back;
    res.decision.hypothesis = nbest.best();
    res.layer = e.layer;
    res.layers_executed = inc.layers_executed();
    res.edits = AlignWords<int>(utt.tokens, nbest.best().tokens);
  };

  if (mode == InferMode::kResource) {
    ExitOutput e;
    for (int m = 1; m <= top; ++m) e = inc.Next();
    const Tensor& grid = e.log_grid.value();
    NBestList nbest = DecodeExit(model, e.exit_index, grid, e.states.value(), opts);
    const double value = policy.metric == ExitMetric::kEntropy
                             ? FrameEntropy(grid)
                             : SentenceConfidence(nbest);
    finish(e, nbest, value, false);
    return res;
  }

  for (int m = 1; m <= top; ++m) {
    ExitOutput e = inc.Next();
    const Tensor& grid = e.log_grid.value();
    NBestList nbest = DecodeExit(model, e.exit_index, grid, e.states.value(), opts);
    ExitScore s;
    s.exit = m;
    s.entropy = FrameEntropy(grid);
    s.confidence = SentenceConfidence(nbest);
    if (policy.Accepts(s) || m == top) {
      finish(e, nbest, s.value(policy.metric), !policy.Accepts(s));
      return res;
    }
  }
  throw StateError("unreachable: no exit evaluated");
}

void WriteInferCsv(std::ostream& os, std::span<const InferenceResult> results,
                   std::span<const FeatureUtterance* const> utts) {
  os << "id,exit,layer,layers_executed,metric_value,hypothesis,reference\n";
  char buf[64];
  for (std::size_t i = 0; i < results.size(); ++i) {
    const InferenceResult& r = results[i];
    std::snprintf(buf, sizeof(buf), "%.6g", r.decision.metric_value);
    os << r.id << ',' << r.decision.exit << ',' << r.layer << ','
       << r.layers_executed << ',' << buf << ','
       << Transcript(r.decision.hypothesis.tokens) << ','
       << Transcript(utts[i]->tokens) << '\n';
  }
}

void WriteWerCsv(std::ostream& os, std::span<const double> per_exit_wer,
                 std::span<const int> exit_layers) {
  os << "exit,layer,wer\n";
  char buf[64];
  for (std::size_t m = 0; m < per_exit_wer.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "%.6g", per_exit_wer[m]);
    os << m + 1 << ',' << exit_layers[m] << ',' << buf << '\n';
  }
}

}  // namespace eeseq
