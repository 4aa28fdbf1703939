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

#ifndef EESEQ_WER_H_
#define EESEQ_WER_H_

#include <span>
#include <string>
#include <vector>

namespace eeseq {

struct EditStats {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_words = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  EditStats& operator+=(const EditStats& o);
};

// Levenshtein alignment between word sequences, counting each error type on
// one minimum-cost path.
template <typename T>
EditStats AlignWords(std::span<const T> ref, std::span<const T> hyp);

std::vector<std::string> SplitWords(const std::string& text);

// Corpus-level rate: total errors over total reference words. Throws when
// the reference side is empty.
double CorpusWer(std::span<const EditStats> per_utterance);

}  // namespace eeseq

#endif  // EESEQ_WER_H_
