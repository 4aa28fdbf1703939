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

#ifndef EESEQ_CORPUS_H_
#define EESEQ_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eeseq/tensor.h"

namespace eeseq {

// Synthetic "speech": every character has a prototype feature vector; an
// utterance is a run of noisy prototype frames per token, separated by short
// noisy silences. Easy utterances get little noise, hard ones a lot.
constexpr int kMaxVocab = 36;

struct CorpusSpec {
  int vocab_size = 8;  // characters 'a', 'b', ... then digits
  int feature_dim = 16;
  int num_train = 400;
  int num_dev = 50;
  int num_test = 100;
  int min_tokens = 2;
  int max_tokens = 12;
  int min_duration = 2;  // frames per token
  int max_duration = 4;
  int max_gap = 1;         // silence frames between tokens
  int repeat_gap = 2;      // minimum silence between equal adjacent tokens
  double noise_easy = 0.3;
  double noise_hard = 1.0;
  double easy_fraction = 0.7;
  double prototype_scale = 1.0;

  void Validate() const;
};

enum class Split { kTrain, kDev, kTest };

std::string SplitName(Split s);
Split ParseSplit(const std::string& s);

struct FeatureUtterance {
  std::string id;
  Split split = Split::kTrain;
  bool easy = true;
  std::vector<int> tokens;  // 1..vocab_size
  Tensor features;          // [T x feature_dim]
};

struct SyntheticCorpus {
  int vocab_size = 0;
  int feature_dim = 0;
  std::vector<FeatureUtterance> utterances;

  std::vector<const FeatureUtterance*> Select(Split s) const;
};

char TokenChar(int token);
int CharToken(char c);
// Space-delimited characters, e.g. "c a b"; each character is one word.
std::string Transcript(std::span<const int> tokens);
std::vector<int> ParseTranscript(const std::string& text, int vocab_size);

// Deterministic in (spec, seed). Splits are consecutive id ranges.
SyntheticCorpus GenerateCorpus(const CorpusSpec& spec, std::uint64_t seed);

// Prototype vectors used by GenerateCorpus: row 0 is silence, row k is
// character k.
Tensor CorpusPrototypes(const CorpusSpec& spec, std::uint64_t seed);

// Text format:
//   eeseq-corpus 1
//   vocab <chars>
//   dim <d>
//   utterances <n> train <a> dev <b> test <c>
// then per utterance:
//   utt <id> <split> <easy|hard>
//   text <space-delimited transcript>
//   frames <T>
//   T lines of d values
void WriteCorpus(std::ostream& os, const SyntheticCorpus& corpus);
SyntheticCorpus ReadCorpus(std::istream& is);
void WriteCorpusFile(const std::string& path, const SyntheticCorpus& corpus);
SyntheticCorpus ReadCorpusFile(const std::string& path);

}  // namespace eeseq

#endif  // EESEQ_CORPUS_H_
