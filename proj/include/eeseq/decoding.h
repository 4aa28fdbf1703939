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

#ifndef EESEQ_DECODING_H_
#define EESEQ_DECODING_H_

#include <functional>
#include <span>
#include <vector>

#include "eeseq/encoder.h"
#include "eeseq/tensor.h"

namespace eeseq {

// Collapsed label sequence (no blanks, no eos) with its log-probability.
struct Hypothesis {
  std::vector<int> tokens;
  double score = 0.0;
};

// Ranking used everywhere: higher score first, ties by ascending token
// sequence.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b);

struct NBestList {
  std::vector<Hypothesis> hypotheses;  // sorted with RanksBefore, unique
  std::size_t k = 0;

  bool empty() const { return hypotheses.empty(); }
  const Hypothesis& best() const { return hypotheses.front(); }
};

struct DecodeOptions {
  std::size_t nbest = 8;
  std::size_t beam = 16;
  std::size_t max_len = 20;  // AED only
};

// Framewise argmax (lowest index wins ties), then the collapse mapping.
// Score is the sum of the per-frame maxima.
Hypothesis GreedyCtcDecode(const Tensor& log_grid);

// CTC prefix beam search keeping separate blank / non-blank ending mass per
// prefix. Scores are log of the total probability found for each collapsed
// sequence. Requires 1 <= k <= beam.
NBestList BeamSearchNBest(const Tensor& log_grid, std::size_t k,
                          std::size_t beam);

// Log-distribution over decoder columns (see EncoderConfig) for the next
// token given a prefix of character tokens.
using DecoderStepFn =
    std::function<std::vector<double>(std::span<const int> prefix)>;

// Autoregressive beam search. Hypotheses end when end-of-sequence is chosen
// (its log-probability is part of the score) or when they reach max_len
// tokens (no end-of-sequence term added). Requires 1 <= k <= beam.
NBestList AedBeamDecode(const DecoderStepFn& step, int vocab_size,
                        std::size_t k, std::size_t beam, std::size_t max_len);

// Convenience wrapper running the exit's attention decoder over fixed
// encoder states.
NBestList AedBeamDecode(EarlyExitEncoder& model, std::size_t exit,
                        const Tensor& states, std::size_t k, std::size_t beam,
                        std::size_t max_len);

// N-best for one exit according to its head kind: CTC prefix search over
// the grid, or decoder beam search over the states.
NBestList DecodeExit(EarlyExitEncoder& model, std::size_t exit,
                     const Tensor& log_grid, const Tensor& states,
                     const DecodeOptions& opts);

}  // namespace eeseq

#endif  // EESEQ_DECODING_H_
