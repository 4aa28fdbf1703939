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

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "eeseq/config.h"
#include "eeseq/corpus.h"
#include "eeseq/errors.h"
#include "eeseq/experiment.h"
#include "eeseq/trainer.h"

namespace eeseq {
namespace {

ExperimentConfig Tiny() {
  std::istringstream is(
      "corpus.num_train = 24\ncorpus.num_dev = 0\ncorpus.num_test = 8\n"
      "corpus.vocab_size = 4\ncorpus.feature_dim = 6\ncorpus.max_tokens = 5\n"
      "encoder.attn_dim = 8\nencoder.num_heads = 2\nencoder.ff_dim = 12\n"
      "encoder.conv_kernel = 3\n"
      "train.steps = 6\ntrain.batch_size = 3\ntrain.warmup_steps = 2\n"
      "train.learning_rate = 0.003\n");
  return ParseConfig(is);
}

std::vector<double> CombinedTrace(const TrainResult& r) {
  std::vector<double> out;
  for (const TraceEntry& e : r.trace)
    if (e.exit == 0) out.push_back(e.loss);
  return out;
}

TEST_CASE("zero weights on shallow exits reproduce the single-exit baseline") {
  for (const char* heads : {"ctc,ctc,ctc", "aed,aed,aed"}) {
    ExperimentConfig cfg = Tiny();
    ApplySetting(cfg, "encoder.head_kinds", heads);
    cfg.Finalize();
    const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);

    ExperimentConfig ee = cfg;
    ee.loss.exit_weights = {0, 0, 1};
    const TrainedModel a = TrainModel(ee, corpus);
    const TrainedModel b = TrainModel(SingleExitConfig(cfg, 6), corpus);
    INFO(heads);
    CHECK(CombinedTrace(a.result) == CombinedTrace(b.result));
    b.model.params().ForEach([&](const Parameter& p) {
      CHECK(a.model.params().Get(p.name).value == p.value);
    });
  }
}

TEST_CASE("single-exit configs truncate depth and keep hyperparameters") {
  const ExperimentConfig cfg = Tiny();
  const ExperimentConfig s = SingleExitConfig(cfg, 4);
  CHECK(s.encoder.num_layers == 4);
  CHECK(s.encoder.exit_layers == std::vector<int>{4});
  CHECK(s.encoder.attn_dim == cfg.encoder.attn_dim);
  CHECK(s.train.steps == cfg.train.steps);
  CHECK_THROWS_AS(SingleExitConfig(cfg, 3), ConfigError);
}

TEST_CASE("training is deterministic") {
  const ExperimentConfig cfg = Tiny();
  const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
  const TrainedModel a = TrainModel(cfg, corpus);
  const TrainedModel b = TrainModel(cfg, corpus);
  std::ostringstream ta, tb, pa, pb;
  WriteTraceCsv(ta, a.result.trace);
  WriteTraceCsv(tb, b.result.trace);
  a.model.params().Save(pa);
  b.model.params().Save(pb);
  CHECK(ta.str() == tb.str());
  CHECK(pa.str() == pb.str());
  CHECK(ta.str().rfind("step,exit,loss\n", 0) == 0);
  // 6 steps x (3 exits + combined).
  CHECK(a.result.trace.size() == 24);
}

TEST_CASE("combined loss decreases over training") {
  ExperimentConfig cfg = Tiny();
  cfg.train.steps = 80;
  cfg.train.warmup_steps = 10;
  const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
  const TrainedModel tm = TrainModel(cfg, corpus);
  const auto& c = tm.result.combined;
  REQUIRE(c.size() == 80);
  const double first = std::accumulate(c.begin(), c.begin() + 10, 0.0) / 10;
  const double last = std::accumulate(c.end() - 10, c.end(), 0.0) / 10;
  CHECK(last < first);
}

TEST_CASE("infeasible utterances are skipped and counted") {
  ExperimentConfig cfg = Tiny();
  const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
  FeatureUtterance bad = corpus.utterances[0];
  bad.tokens = {1, 1, 1, 1};
  bad.features = Tensor({4, 6}, 0.1);  // two frames after subsampling
  const std::vector<const FeatureUtterance*> set = {&bad, &corpus.utterances[1]};
  EarlyExitEncoder model(cfg.encoder);
  cfg.train.steps = 2;
  cfg.train.batch_size = 2;
  const TrainResult r = Train(model, set, cfg.loss, cfg.train);
  CHECK(r.skipped_infeasible == 2);
  CHECK(r.combined.size() == 2);
}

TEST_CASE("non-finite losses abort with the step index") {
  ExperimentConfig cfg = Tiny();
  const SyntheticCorpus corpus = GenerateCorpus(cfg.corpus, cfg.corpus_seed);
  FeatureUtterance bad = corpus.utterances[0];
  bad.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const std::vector<const FeatureUtterance*> set = {&bad};
  EarlyExitEncoder model(cfg.encoder);
  try {
    Train(model, set, cfg.loss, cfg.train);
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("optimizer warmup, clipping and descent") {
  OptimizerConfig oc;
  oc.learning_rate = 0.1;
  oc.warmup_steps = 4;
  AdamOptimizer adam(oc);
  CHECK(adam.LearningRate(1) == doctest::Approx(0.025));
  CHECK(adam.LearningRate(4) == 0.1);
  CHECK(adam.LearningRate(100) == 0.1);

  ParamStore ps;
  Parameter& w = ps.Add("w", Tensor::Matrix(1, 2, {3.0, -4.0}));
  oc.clip_norm = 1.0;
  AdamOptimizer opt(oc);
  double prev = 25.0;
  for (int i = 0; i < 50; ++i) {
    // Gradient of |w|^2.
    for (std::size_t j = 0; j < 2; ++j) w.grad[j] = 2 * w.value[j];
    const double norm = opt.Step(ps);
    if (i == 0) CHECK(norm == doctest::Approx(10.0));
  }
  const double now = w.value[0] * w.value[0] + w.value[1] * w.value[1];
  CHECK(now < prev);
}

}  // namespace
}  // namespace eeseq
