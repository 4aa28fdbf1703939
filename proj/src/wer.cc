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

#include "eeseq/wer.h"

#include <sstream>

#include "eeseq/errors.h"

namespace eeseq {

EditStats& EditStats::operator+=(const EditStats& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_words += o.ref_words;
  return *this;
}

template <typename T>
EditStats AlignWords(std::span<const T> ref, std::span<const T> hyp) {
  struct Cell {
    std::size_t cost = 0, sub = 0, ins = 0, del = 0;
  };
  const std::size_t R = ref.size(), H = hyp.size();
  // Two rolling rows of the (R+1) x (H+1) table.
  std::vector<Cell> prev(H + 1), cur(H + 1);
  for (std::size_t j = 0; j <= H; ++j) prev[j] = {j, 0, j, 0};
  for (std::size_t i = 1; i <= R; ++i) {
    cur[0] = {i, 0, 0, i};
    for (std::size_t j = 1; j <= H; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cell diag = prev[j - 1];
      diag.cost += same ? 0 : 1;
      diag.sub += same ? 0 : 1;
      Cell del = prev[j];
      ++del.cost;
      ++del.del;
      Cell ins = cur[j - 1];
      ++ins.cost;
      ++ins.ins;
      Cell best = diag;
      if (del.cost < best.cost) best = del;
      if (ins.cost < best.cost) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  EditStats s;
  s.substitutions = prev[H].sub;
  s.insertions = prev[H].ins;
  s.deletions = prev[H].del;
  s.ref_words = R;
  return s;
}

template EditStats AlignWords<int>(std::span<const int>, std::span<const int>);
template EditStats AlignWords<std::string>(std::span<const std::string>,
                                           std::span<const std::string>);

std::vector<std::string> SplitWords(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

double CorpusWer(std::span<const EditStats> per_utterance) {
  EditStats total;
  for (const EditStats& s : per_utterance) total += s;
  if (total.ref_words == 0)
    throw DimensionError("WER undefined: reference corpus has no words");
  return static_cast<double>(total.errors()) /
         static_cast<double>(total.ref_words);
}

}  // namespace eeseq
