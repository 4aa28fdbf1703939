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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance --config configs/acceptance.conf [--only 1,2,3]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eeseq/config.h"
#include "eeseq/corpus.h"
#include "eeseq/decoding.h"
#include "eeseq/errors.h"
#include "eeseq/evaluation.h"
#include "eeseq/exit_policy.h"
#include "eeseq/experiment.h"
#include "eeseq/losses.h"
#include "eeseq/ops.h"
#include "eeseq/trainer.h"
#include "test_util.h"

namespace eeseq {
namespace {

using Clock = std::chrono::steady_clock;
using testing::RandomLogGrid;
using testing::RandomTensor;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// 1. CTC against exhaustive enumeration.
Outcome CtcOracle() {
  const auto start = Clock::now();
  Rng rng(1);
  double worst = 0.0;
  int feasible = 0, mismatched_infeasible = 0;
  for (int i = 0; i < 200; ++i) {
    const auto T = static_cast<std::size_t>(rng.UniformInt(1, 6));
    const auto V = static_cast<std::size_t>(rng.UniformInt(2, 5));
    const Tensor grid = RandomLogGrid(rng, T, V);
    std::vector<int> y(static_cast<std::size_t>(rng.UniformInt(0, 3)));
    for (int& v : y) v = rng.UniformInt(1, static_cast<int>(V) - 1);
    const double brute = CtcLossBruteforce(grid, y);
    if (CtcMinFrames(y) > T) {
      bool threw = false;
      try {
        CtcLossValue(grid, y);
      } catch (const InfeasibleTargetError&) {
        threw = true;
      }
      if (!threw || !std::isinf(brute)) ++mismatched_infeasible;
      continue;
    }
    ++feasible;
    worst = std::max(worst, std::fabs(CtcLossValue(grid, y) - brute));
  }
  const double secs = Seconds(start);
  return {worst < 1e-6 && mismatched_infeasible == 0 && secs < 60.0,
          Fmt("200 instances (%d feasible), max |diff| %.3g, %.2fs", feasible,
              worst, secs)};
}

// 2. Finite-difference gradient suite.
Outcome GradientSuite() {
  const auto start = Clock::now();
  Rng rng(2);
  using testing::GraphFn;
  std::vector<std::pair<std::string, std::pair<std::function<std::vector<Tensor>()>, GraphFn>>> ops;
  auto add = [&](std::string name, std::function<std::vector<Tensor>()> in, GraphFn fn) {
    ops.push_back({std::move(name), {std::move(in), std::move(fn)}});
  };
  add("matmul", [&] { return std::vector{RandomTensor(rng, {3, 4}), RandomTensor(rng, {4, 2})}; },
      [](Graph&, const std::vector<Var>& v) { return MatMul(v[0], v[1]); });
  add("transpose", [&] { return std::vector{RandomTensor(rng, {3, 2})}; },
      [](Graph&, const std::vector<Var>& v) { return Transpose(v[0]); });
  add("add/sub/mul", [&] { return std::vector{RandomTensor(rng, {2, 3}), RandomTensor(rng, {2, 3})}; },
      [](Graph&, const std::vector<Var>& v) { return Mul(Add(v[0], v[1]), Sub(v[0], Scale(v[1], 0.5))); });
  add("add_bias", [&] { return std::vector{RandomTensor(rng, {3, 4}), RandomTensor(rng, {4})}; },
      [](Graph&, const std::vector<Var>& v) { return AddBias(v[0], v[1]); });
  add("weighted_sum", [&] { return std::vector{RandomTensor(rng, {1}), RandomTensor(rng, {1})}; },
      [](Graph&, const std::vector<Var>& v) {
        const std::vector<double> w = {0.3, 0.7};
        return WeightedSum(v, w);
      });
  add("log_softmax", [&] { return std::vector{RandomTensor(rng, {2, 5}, -3, 3)}; },
      [](Graph&, const std::vector<Var>& v) { return LogSoftmax(v[0]); });
  add("softmax", [&] { return std::vector{RandomTensor(rng, {2, 5}, -3, 3)}; },
      [](Graph&, const std::vector<Var>& v) { return Softmax(v[0]); });
  add("layer_norm", [&] { return std::vector{RandomTensor(rng, {3, 5}), RandomTensor(rng, {5}), RandomTensor(rng, {5})}; },
      [](Graph&, const std::vector<Var>& v) { return LayerNorm(v[0], v[1], v[2]); });
  add("swish", [&] { return std::vector{RandomTensor(rng, {2, 4}, -4, 4)}; },
      [](Graph&, const std::vector<Var>& v) { return Swish(v[0]); });
  add("depthwise_conv", [&] { return std::vector{RandomTensor(rng, {7, 3}), RandomTensor(rng, {3, 3})}; },
      [](Graph&, const std::vector<Var>& v) { return DepthwiseConv1d(v[0], v[1], 2); });
  add("slice/concat", [&] { return std::vector{RandomTensor(rng, {2, 5})}; },
      [](Graph&, const std::vector<Var>& v) {
        const std::vector<Var> parts = {SliceCols(v[0], 2, 3), SliceCols(v[0], 0, 2)};
        return ConcatCols(parts);
      });
  add("gather/select", [&] { return std::vector{RandomTensor(rng, {4, 3})}; },
      [](Graph&, const std::vector<Var>& v) {
        const std::vector<int> idx = {3, 1, 1}, cols = {0, 2, 1};
        return SelectPerRow(GatherRows(v[0], idx), cols);
      });
  add("ctc_loss", [&] { return std::vector{RandomTensor(rng, {6, 4}, -2, 2)}; },
      [](Graph&, const std::vector<Var>& v) {
        const std::vector<int> y = {1, 3, 3};
        return CtcLoss(LogSoftmax(v[0]), y);
      });
  add("ce_seq_loss", [&] { return std::vector{RandomTensor(rng, {3, 4}, -2, 2)}; },
      [](Graph&, const std::vector<Var>& v) {
        const std::vector<int> gold = {2, 0, 3};
        return CeSeqLoss(LogSoftmax(v[0]), gold);
      });

  double worst = 0.0;
  std::string worst_name;
  for (auto& [name, c] : ops)
    for (int i = 0; i < 100; ++i) {
      const double e = testing::GradCheck(c.first(), c.second, 500 + i);
      if (e > worst) {
        worst = e;
        worst_name = name;
      }
    }

  // Full per-exit loss of an encoder with CTC and AED exits.
  EncoderConfig ec;
  ec.input_dim = 3;
  ec.num_layers = 2;
  ec.exit_layers = {1, 2};
  ec.attn_dim = 4;
  ec.num_heads = 2;
  ec.ff_dim = 6;
  ec.conv_kernel = 3;
  ec.vocab_size = 3;
  ec.head_kinds = {HeadKind::kCtc, HeadKind::kAed};
  EarlyExitEncoder model(ec);
  FeatureUtterance utt;
  utt.tokens = {2, 1};
  utt.features = RandomTensor(rng, {8, 3});
  LossConfig loss;
  const std::vector<std::string> names = model.params().Names();
  std::vector<std::string> picked;
  for (int i = 0; i < 10; ++i)
    picked.push_back(names[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<int>(names.size()) - 1))]);
  const double model_err = testing::ParamGradCheck(
      model.params(), picked,
      [&](Graph& g) { return ComputeUtteranceLoss(model, g, utt, loss).total; }, 6);
  if (model_err > worst) {
    worst = model_err;
    worst_name = "per-exit loss";
  }
  const double secs = Seconds(start);
  return {worst < 1e-4 && secs < 120.0,
          Fmt("%zu ops x 100 instances + per-exit loss, max rel err %.3g (%s), %.2fs",
              ops.size(), worst, worst_name.c_str(), secs)};
}

// 3. Closed-form exit metrics.
Outcome ClosedForms() {
  std::vector<std::string> bad;
  auto expect = [&](const char* what, double got, double want) {
    if (!(std::fabs(got - want) <= 1e-12)) bad.push_back(what);
  };
  Tensor uniform({5, 4}, std::log(0.25));
  expect("entropy uniform", FrameEntropy(uniform), std::log(4.0) / 4.0);
  Tensor onehot({5, 4}, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < 5; ++t) onehot(t, t % 4) = 0.0;
  expect("entropy one-hot", FrameEntropy(onehot), 0.0);
  Tensor half = uniform;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t c = 0; c < 4; ++c) half(t, c) = c == 0 ? 0.0 : -1e30;
  expect("entropy half", FrameEntropy(half), 3 * std::log(4.0) / 20.0);

  auto list = [](std::vector<double> scores) {
    NBestList l;
    for (std::size_t i = 0; i < scores.size(); ++i)
      l.hypotheses.push_back({{static_cast<int>(i) + 1}, scores[i]});
    l.k = scores.size();
    return l;
  };
  expect("confidence K=1", SentenceConfidence(list({-2.5})), 1.0);
  expect("confidence equal K=5", SentenceConfidence(list({-1, -1, -1, -1, -1})), 0.2);
  expect("confidence (0,-ln2,-ln2)",
         SentenceConfidence(list({0, -std::log(2.0), -std::log(2.0)})), 0.5);
  std::string detail = "6 closed-form cases exact to 1e-12";
  for (const auto& b : bad) detail += "; failed " + b;
  return {bad.empty(), detail};
}

// 4. Prefix property.
Outcome PrefixProperty(const ExperimentConfig& cfg, EarlyExitEncoder& model) {
  Rng rng(4);
  int mismatches = 0;
  for (int i = 0; i < 20; ++i) {
    const auto T = static_cast<std::size_t>(rng.UniformInt(cfg.encoder.subsample_factor, 40));
    const Tensor x = RandomTensor(rng, {T, static_cast<std::size_t>(cfg.encoder.input_dim)}, -2, 2);
    Graph full;
    const ExitOutputs all = model.EncodeWithTaps(full, x);
    for (std::size_t m = 0; m < all.exits.size(); ++m) {
      Graph part;
      const ExitOutputs trunc = model.EncodeWithTaps(part, x, all.exits[m].layer);
      if (!(trunc.exits.back().log_grid.value() == all.exits[m].log_grid.value())) ++mismatches;
    }
  }
  return {mismatches == 0,
          Fmt("20 utterances x %zu exits, %d grids differ", cfg.encoder.num_exits(), mismatches)};
}

struct SeedRun {
  std::uint64_t seed;
  std::vector<ComparisonRow> rows;
};

std::string WerList(const std::vector<ComparisonRow>& rows, bool noee) {
  std::string s;
  for (const auto& r : rows) {
    if (!s.empty()) s += ' ';
    if (noee)
      s += r.noee_wer ? Fmt("%.2f", 100 * *r.noee_wer) : "--";
    else
      s += Fmt("%.2f", 100 * r.ee_wer);
  }
  return s;
}

// 5. EE versus no-EE at the two deepest exits.
Outcome EeVsNoEe(const std::vector<SeedRun>& runs, double secs) {
  int seeds_ok = 0;
  bool parity = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    const std::size_t M = r.rows.size();
    bool ok = true;
    for (std::size_t m = M - 2; m < M; ++m)
      ok = ok && r.rows[m].noee_wer && r.rows[m].ee_wer <= *r.rows[m].noee_wer;
    seeds_ok += ok;
    const auto& deep = r.rows.back();
    parity = parity && deep.noee_wer && deep.ee_wer - *deep.noee_wer <= 0.02;
    detail += Fmt("; seed %llu EE [%s] no-EE [%s]", static_cast<unsigned long long>(r.seed),
                  WerList(r.rows, false).c_str(), WerList(r.rows, true).c_str());
  }
  const int needed = static_cast<int>(runs.size()) - 1;
  return {runs.size() >= 3 && seeds_ok >= needed && parity,
          Fmt("EE <= no-EE at the two deepest exits in %d/%zu seeds (need %d), deepest "
              "within 2 points in all: %s, %.0fs",
              seeds_ok, runs.size(), needed, parity ? "yes" : "no", secs) +
              detail};
}

// 6. Depth trend of the EE model, one inversion of at most 2 points.
Outcome DepthTrend(const std::vector<SeedRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    int inversions = 0;
    double worst = 0.0;
    for (std::size_t m = 1; m < r.rows.size(); ++m) {
      const double rise = r.rows[m].ee_wer - r.rows[m - 1].ee_wer;
      if (rise > 0) {
        ++inversions;
        worst = std::max(worst, rise);
      }
    }
    const bool seed_ok = inversions == 0 || (inversions == 1 && worst <= 0.02);
    ok = ok && seed_ok;
    detail += Fmt("%sseed %llu: %d inversion(s), largest %.2f points", detail.empty() ? "" : "; ",
                  static_cast<unsigned long long>(r.seed), inversions, 100 * worst);
  }
  return {ok, detail};
}

struct SweepData {
  std::vector<SweepRow> entropy, confidence;
  double deepest_wer = 0.0;
};

// 7. Sweep endpoints.
Outcome SweepEndpoints(const SweepData& s, std::size_t M) {
  const SweepRow& lo = s.entropy.front();
  const SweepRow& hi = s.entropy.back();
  bool monotone = true;
  for (std::size_t i = 1; i < s.entropy.size(); ++i)
    monotone = monotone && s.entropy[i].avg_exit <= s.entropy[i - 1].avg_exit;
  const bool zero_ok = lo.threshold == 0.0 && lo.avg_exit == static_cast<double>(M) &&
                       lo.wer == s.deepest_wer;
  const bool inf_ok = std::isinf(hi.threshold) && hi.avg_exit == 1.0;
  // Identical CSV text as well as identical doubles.
  const bool digits = Fmt("%.17g", lo.wer) == Fmt("%.17g", s.deepest_wer);
  return {zero_ok && inf_ok && monotone && digits,
          Fmt("threshold 0: avg_exit %.6g, WER %.17g vs deepest %.17g; threshold inf: "
              "avg_exit %.6g; monotone over %zu thresholds: %s",
              lo.avg_exit, lo.wer, s.deepest_wer, hi.avg_exit, s.entropy.size(),
              monotone ? "yes" : "no")};
}

// 8. An intermediate threshold saves layers at near-deepest WER.
Outcome TradeOff(const SweepData& s, std::size_t M) {
  const SweepRow* best = nullptr;
  for (const SweepRow& r : s.entropy) {
    if (r.threshold == 0.0 || std::isinf(r.threshold)) continue;
    if (r.avg_exit > static_cast<double>(M) - 1.0) continue;
    if (r.wer > 1.1 * s.deepest_wer) continue;
    if (!best || r.avg_exit < best->avg_exit) best = &r;
  }
  // Report-only: which metric reaches lower exits at the same WER budget.
  auto lowest = [&](const std::vector<SweepRow>& rows) {
    double low = static_cast<double>(M);
    for (const SweepRow& r : rows)
      if (r.wer <= 1.1 * s.deepest_wer) low = std::min(low, r.avg_exit);
    return low;
  };
  std::string detail =
      best ? Fmt("entropy threshold %.6g: avg_exit %.4f, WER %.2f%% vs deepest %.2f%%",
                 best->threshold, best->avg_exit, 100 * best->wer, 100 * s.deepest_wer)
           : Fmt("no interior threshold with avg_exit <= %zu within 10%% of %.2f%%", M - 1,
                 100 * s.deepest_wer);
  detail += Fmt("; lowest avg_exit within 10%% of deepest WER: entropy %.4f, confidence %.4f "
                "(report only)",
                lowest(s.entropy), lowest(s.confidence));
  return {best != nullptr, detail};
}

struct ArtifactCsvs {
  std::string trace, wer, sweep;
  bool operator==(const ArtifactCsvs&) const = default;
};

ArtifactCsvs Artifacts(const ExperimentConfig& cfg, const SyntheticCorpus& corpus,
                       const TrainedModel& tm, SweepData* sweep_out) {
  EarlyExitEncoder model = tm.model;
  const auto test = corpus.Select(Split::kTest);
  const auto decodes = DecodeAllExits(model, test, cfg.decode);
  const auto wer = PerExitWer(decodes);
  const auto records = ToSweepRecords(decodes);
  SweepData s;
  s.deepest_wer = EvaluateWer(model, test, static_cast<int>(cfg.encoder.num_exits()), cfg.decode);
  const auto grid = [&](ExitMetric m) {
    return DefaultThresholdGrid(records, m, static_cast<std::size_t>(cfg.policy.grid_points));
  };
  s.entropy = SweepThresholds(records, ExitMetric::kEntropy, grid(ExitMetric::kEntropy),
                              cfg.encoder.exit_layers);
  s.confidence = SweepThresholds(records, ExitMetric::kConfidence,
                                 grid(ExitMetric::kConfidence), cfg.encoder.exit_layers);
  std::ostringstream trace, wer_csv, sweep;
  WriteTraceCsv(trace, tm.result.trace);
  WriteWerCsv(wer_csv, wer, cfg.encoder.exit_layers);
  WriteSweepCsv(sweep, s.entropy);
  WriteSweepCsv(sweep, s.confidence, false);
  if (sweep_out) *sweep_out = s;
  return {trace.str(), wer_csv.str(), sweep.str()};
}

int Run(const std::string& config_path, const std::set<int>& only) {
  const ExperimentConfig cfg = LoadConfigFile(config_path);
  const auto want = [&](int c) { return only.empty() || only.count(c); };
  std::map<int, Outcome> results;
  auto report = [&](int c, const Outcome& o) {
    results[c] = o;
    std::printf("criterion %d: %s  %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  if (want(1)) report(1, CtcOracle());
  if (want(2)) report(2, GradientSuite());
  if (want(3)) report(3, ClosedForms());
  if (want(4)) {
    EarlyExitEncoder model(cfg.encoder);
    report(4, PrefixProperty(cfg, model));
  }

  if (want(5) || want(6) || want(7) || want(8) || want(9)) {
    const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
    const auto start = Clock::now();
    std::vector<SeedRun> runs;
    std::optional<TrainedModel> first;
    const bool compare = want(5) || want(6);
    for (std::uint64_t seed : cfg.compare_seeds) {
      if (!compare && first) break;
      const ExperimentConfig sc = WithSeed(cfg, seed);
      TrainedModel ee = TrainModel(sc, corpus);
      SeedRun run{seed, {}};
      const auto test = corpus.Select(Split::kTest);
      const auto ee_wer = PerExitWer(DecodeAllExits(ee.model, test, sc.decode));
      for (std::size_t m = 0; m < sc.encoder.num_exits(); ++m)
        run.rows.push_back({sc.encoder.exit_layers[m], std::nullopt, ee_wer[m]});
      if (want(5)) {
        const std::vector<int> depths =
            sc.noee_depths.empty() ? sc.encoder.exit_layers : sc.noee_depths;
        for (int depth : depths) {
          TrainedModel single = TrainModel(SingleExitConfig(sc, depth), corpus);
          const double w = PerExitWer(DecodeAllExits(single.model, test, sc.decode))[0];
          for (auto& row : run.rows)
            if (row.layer == depth) row.noee_wer = w;
        }
      }
      std::fprintf(stderr, "seed %llu done after %.0fs\n",
                   static_cast<unsigned long long>(seed), Seconds(start));
      runs.push_back(run);
      if (!first) first = std::move(ee);
    }
    const double secs = Seconds(start);
    if (want(5)) report(5, EeVsNoEe(runs, secs));
    if (want(6)) report(6, DepthTrend(runs));

    if (want(7) || want(8) || want(9)) {
      const ExperimentConfig sc = WithSeed(cfg, cfg.compare_seeds.front());
      SweepData sweep;
      const ArtifactCsvs a = Artifacts(sc, corpus, *first, &sweep);
      const std::size_t M = sc.encoder.num_exits();
      if (want(7)) report(7, SweepEndpoints(sweep, M));
      if (want(8)) report(8, TradeOff(sweep, M));
      if (want(9)) {
        // Second, independent run of train + eval + sweep.
        const TrainedModel again = TrainModel(sc, corpus);
        const ArtifactCsvs b = Artifacts(sc, corpus, again, nullptr);
        report(9, {a == b, Fmt("trace %s, wer %s, sweep %s (%zu/%zu/%zu bytes)",
                               a.trace == b.trace ? "identical" : "DIFFER",
                               a.wer == b.wer ? "identical" : "DIFFER",
                               a.sweep == b.sweep ? "identical" : "DIFFER", a.trace.size(),
                               a.wer.size(), a.sweep.size())});
      }
    }
  }

  int failed = 0;
  for (const auto& [c, o] : results) failed += !o.pass;
  std::printf("%zu criteria run, %d failed\n", results.size(), failed);
  return failed ? 1 : 0;
}

}  // namespace
}  // namespace eeseq

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string config;
  std::vector<int> only;
  app.add_option("--config", config, "Experiment config")->required();
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  try {
    return eeseq::Run(config, {only.begin(), only.end()});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
