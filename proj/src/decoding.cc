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

#include "eeseq/decoding.h"

#include <algorithm>
#include <map>

#include "eeseq/errors.h"
#include "eeseq/losses.h"

namespace eeseq {

namespace {

void CheckWidths(std::size_t k, std::size_t beam) {
  if (k < 1) throw ConfigError("n-best size must be >= 1");
  if (beam < k) throw ConfigError("beam must be >= n-best size");
}

struct PrefixMass {
  double blank = kLogZero;
  double non_blank = kLogZero;
  double total() const { return LogAdd(blank, non_blank); }
};

using PrefixMap = std::map<std::vector<int>, PrefixMass>;

std::vector<Hypothesis> Ranked(const PrefixMap& beams) {
  std::vector<Hypothesis> out;
  out.reserve(beams.size());
  for (const auto& [prefix, mass] : beams)
    out.push_back({prefix, std::min(mass.total(), 0.0)});
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

}  // namespace

bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

Hypothesis GreedyCtcDecode(const Tensor& log_grid) {
  std::vector<int> path(log_grid.rows());
  double score = 0.0;
  for (std::size_t t = 0; t < log_grid.rows(); ++t) {
    auto row = log_grid.row(t);
    const auto best = std::max_element(row.begin(), row.end());
    path[t] = static_cast<int>(best - row.begin());
    score += *best;
  }
  return {CtcCollapse(path), score};
}

NBestList BeamSearchNBest(const Tensor& log_grid, std::size_t k,
                          std::size_t beam) {
  CheckWidths(k, beam);
  const std::size_t T = log_grid.rows(), V = log_grid.cols();
  PrefixMap beams;
  beams[{}].blank = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    PrefixMap next;
    for (const auto& [prefix, mass] : beams) {
      const double all = mass.total();
      PrefixMass& stay = next[prefix];
      stay.blank = LogAdd(stay.blank, all + log_grid(t, kBlank));
      for (std::size_t c = 1; c < V; ++c) {
        const int tok = static_cast<int>(c);
        const double lp = log_grid(t, c);
        std::vector<int> extended = prefix;
        extended.push_back(tok);
        if (!prefix.empty() && prefix.back() == tok) {
          // Repeat without a blank stays on the same prefix.
          PrefixMass& same = next[prefix];
          same.non_blank = LogAdd(same.non_blank, mass.non_blank + lp);
          PrefixMass& ext = next[extended];
          ext.non_blank = LogAdd(ext.non_blank, mass.blank + lp);
        } else {
          PrefixMass& ext = next[extended];
          ext.non_blank = LogAdd(ext.non_blank, all + lp);
        }
      }
    }
    if (next.size() > beam) {
      std::vector<Hypothesis> ranked = Ranked(next);
      PrefixMap pruned;
      for (std::size_t i = 0; i < beam; ++i)
        pruned.emplace(ranked[i].tokens, next.at(ranked[i].tokens));
      next = std::move(pruned);
    }
    beams = std::move(next);
  }
  NBestList out;
  out.k = k;
  out.hypotheses = Ranked(beams);
  if (out.hypotheses.size() > k) out.hypotheses.resize(k);
  return out;
}

NBestList AedBeamDecode(const DecoderStepFn& step, int vocab_size,
                        std::size_t k, std::size_t beam, std::size_t max_len) {
  CheckWidths(k, beam);
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  const int eos_col = vocab_size;
  std::vector<Hypothesis> active = {Hypothesis{}};
  std::vector<Hypothesis> finished;
  while (!active.empty()) {
    struct Candidate {
      Hypothesis hyp;
      bool ends;
    };
    std::vector<Candidate> cands;
    for (const Hypothesis& h : active) {
      const std::vector<double> dist = step(h.tokens);
      if (dist.size() != static_cast<std::size_t>(vocab_size) + 1)
        throw DimensionError("decoder step returned wrong distribution size");
      for (int c = 0; c <= vocab_size; ++c) {
        Candidate cand{h, c == eos_col};
        cand.hyp.score += dist[static_cast<std::size_t>(c)];
        if (!cand.ends) cand.hyp.tokens.push_back(DecoderColumnToken(c));
        cands.push_back(std::move(cand));
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.hyp.score != b.hyp.score)
                         return a.hyp.score > b.hyp.score;
                       if (a.hyp.tokens != b.hyp.tokens)
                         return a.hyp.tokens < b.hyp.tokens;
                       return a.ends && !b.ends;
                     });
    if (cands.size() > beam) cands.resize(beam);
    active.clear();
    for (Candidate& c : cands) {
      if (c.ends || c.hyp.tokens.size() >= max_len)
        finished.push_back(std::move(c.hyp));
      else
        active.push_back(std::move(c.hyp));
    }
  }
  // The same tokens can finish both via eos and via the length cap; keep the
  // better one.
  std::sort(finished.begin(), finished.end(), RanksBefore);
  NBestList out;
  out.k = k;
  for (Hypothesis& h : finished) {
    h.score = std::min(h.score, 0.0);
    const bool dup = std::any_of(
        out.hypotheses.begin(), out.hypotheses.end(),
        [&](const Hypothesis& o) { return o.tokens == h.tokens; });
    if (!dup) out.hypotheses.push_back(std::move(h));
    if (out.hypotheses.size() == k) break;
  }
  return out;
}

NBestList AedBeamDecode(EarlyExitEncoder& model, std::size_t exit,
                        const Tensor& states, std::size_t k, std::size_t beam,
                        std::size_t max_len) {
  DecoderStepFn step = [&](std::span<const int> prefix) {
    Graph g;
    Var h = g.Constant(states);
    Var dist = model.DecoderStep(g, exit, h, prefix);
    auto d = dist.value().data();
    return std::vector<double>(d.begin(), d.end());
  };
  return AedBeamDecode(step, model.config().vocab_size, k, beam, max_len);
}

NBestList DecodeExit(EarlyExitEncoder& model, std::size_t exit,
                     const Tensor& log_grid, const Tensor& states,
                     const DecodeOptions& opts) {
  if (model.config().head_kind(exit) == HeadKind::kAed)
    return AedBeamDecode(model, exit, states, opts.nbest, opts.beam,
                         opts.max_len);
  return BeamSearchNBest(log_grid, opts.nbest, opts.beam);
}

}  // namespace eeseq
