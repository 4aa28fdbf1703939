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

#ifndef EESEQ_CONFIG_H_
#define EESEQ_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "eeseq/corpus.h"
#include "eeseq/decoding.h"
#include "eeseq/encoder.h"
#include "eeseq/exit_policy.h"
#include "eeseq/losses.h"

namespace eeseq {

struct OptimizerConfig {
  double learning_rate = 3e-4;
  int warmup_steps = 100;
  int steps = 3000;
  int batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  double clip_norm = 5.0;  // <= 0 disables clipping
  std::uint64_t seed = 1;  // batch order
  int log_every = 0;       // progress lines on stderr; 0 = silent
};

struct PolicyConfig {
  ExitMetric metric = ExitMetric::kEntropy;
  double threshold = 0.1;
  std::vector<double> thresholds;  // sweep grid; empty = derived from data
  int grid_points = 24;
};

struct ExperimentConfig {
  EncoderConfig encoder;
  LossConfig loss;
  OptimizerConfig train;
  CorpusSpec corpus;
  std::uint64_t corpus_seed = 7;
  DecodeOptions decode;
  PolicyConfig policy;
  std::vector<std::uint64_t> compare_seeds = {1, 2, 3};
  std::vector<int> noee_depths;  // empty = every exit layer

  // Copies corpus dims into the encoder and checks cross-field invariants.
  void Finalize();
};

// Flat "key = value" lines; '#' starts a comment; keys are dotted
// (encoder.num_layers). Lists are comma separated. Throws ConfigError with
// the line number on malformed lines or unknown keys.
std::vector<std::pair<std::string, std::string>> ParseKeyValues(
    std::istream& is);

void ApplySetting(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value);

ExperimentConfig ParseConfig(std::istream& is);
ExperimentConfig LoadConfigFile(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Serializes every key, in the same format ParseConfig reads.
void WriteConfig(std::ostream& os, const ExperimentConfig& cfg);

}  // namespace eeseq

#endif  // EESEQ_CONFIG_H_
