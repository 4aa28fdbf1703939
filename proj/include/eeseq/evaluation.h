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

#ifndef EESEQ_EVALUATION_H_
#define EESEQ_EVALUATION_H_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eeseq/corpus.h"
#include "eeseq/decoding.h"
#include "eeseq/encoder.h"
#include "eeseq/exit_policy.h"
#include "eeseq/wer.h"

namespace eeseq {

// Runs fn(0..n-1) over hardware threads; each index is handled exactly once
// and callers write results by index, so output order never depends on
// scheduling.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

// Full forward pass with every exit decoded, scored and aligned against the
// reference. Computed once and reused by eval and threshold sweeps.
struct UtteranceDecode {
  std::vector<ExitScore> scores;
  std::vector<Hypothesis> best;  // 1-best of each exit's N-best list
  std::vector<EditStats> edits;
};

std::vector<UtteranceDecode> DecodeAllExits(
    EarlyExitEncoder& model, std::span<const FeatureUtterance* const> utts,
    const DecodeOptions& opts);

// Corpus WER of each exit's 1-best (index m-1 for exit m).
std::vector<double> PerExitWer(std::span<const UtteranceDecode> decodes);

// WER of exit m (1-based) over a split. Throws on an empty reference.
double EvaluateWer(EarlyExitEncoder& model,
                   std::span<const FeatureUtterance* const> utts, int exit,
                   const DecodeOptions& opts);

std::vector<UtteranceExitRecord> ToSweepRecords(
    std::span<const UtteranceDecode> decodes);

enum class InferMode { kResource, kResult };
InferMode ParseInferMode(const std::string& s);

struct InferenceResult {
  std::string id;
  ExitDecision decision;
  int layer = 0;            // encoder layer of the chosen exit
  int layers_executed = 0;  // blocks actually run
  EditStats edits;
};

// Resource mode runs the encoder up to the capped exit (or the deepest) and
// decodes there. Result mode advances exit by exit, scoring each one, and
// stops at the first exit the policy accepts (or the cap).
InferenceResult Infer(EarlyExitEncoder& model, const FeatureUtterance& utt,
                      InferMode mode, const ExitPolicy& policy,
                      const DecodeOptions& opts);

// CSV: id,exit,layer,layers_executed,metric_value,hypothesis,reference
void WriteInferCsv(std::ostream& os, std::span<const InferenceResult> results,
                   std::span<const FeatureUtterance* const> utts);

// CSV: exit,layer,wer
void WriteWerCsv(std::ostream& os, std::span<const double> per_exit_wer,
                 std::span<const int> exit_layers);

}  // namespace eeseq

#endif  // EESEQ_EVALUATION_H_
