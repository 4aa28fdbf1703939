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

#include <sstream>
#include <string>

#include "doctest.h"
#include "eeseq/config.h"
#include "eeseq/errors.h"
#include "eeseq/params.h"
#include "test_util.h"

namespace eeseq {
namespace {

ExperimentConfig Parse(const std::string& text) {
  std::istringstream is(text);
  return ParseConfig(is);
}

TEST_CASE("defaults") {
  const ExperimentConfig c = Parse("");
  CHECK(c.encoder.num_layers == 6);
  CHECK(c.encoder.exit_layers == std::vector<int>{2, 4, 6});
  CHECK(c.encoder.attn_dim == 64);
  CHECK(c.encoder.num_heads == 4);
  CHECK(c.encoder.ff_dim == 128);
  CHECK(c.encoder.subsample_factor == 2);
  CHECK(c.loss.lambda_ctc == 0.3);
  CHECK(c.loss.lambda_ce == 0.7);
  CHECK(c.train.learning_rate == 3e-4);
  CHECK(c.train.warmup_steps == 100);
  CHECK(c.decode.nbest == 8);
  CHECK(c.decode.beam == 16);
  CHECK(c.compare_seeds.size() == 3);
}

TEST_CASE("dotted keys, comments and lists") {
  const ExperimentConfig c = Parse(
      "# experiment\n"
      "encoder.num_layers = 12   # deeper\n"
      "encoder.exit_layers = 2,4,6,8,10,12\n"
      "encoder.head_kinds = ctc, aed, ctc, aed, ctc, aed\n"
      "\n"
      "  corpus.vocab_size=20\n"
      "seed = 9\n"
      "policy.metric = confidence\n");
  CHECK(c.encoder.num_layers == 12);
  CHECK(c.encoder.num_exits() == 6);
  CHECK(c.encoder.head_kind(1) == HeadKind::kAed);
  CHECK(c.encoder.vocab_size == 20);
  CHECK(c.encoder.seed == 9);
  CHECK(c.train.seed == 9);
  CHECK(c.policy.metric == ExitMetric::kConfidence);
}

TEST_CASE("malformed configs are rejected with a message") {
  auto message = [](const std::string& text) {
    try {
      Parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("encoder.num_layers 6\n").find("line 1") != std::string::npos);
  CHECK(message("a = 1\n").find("unknown config key") != std::string::npos);
  CHECK(message("# ok\n= 2\n").find("line 2") != std::string::npos);
  CHECK(message("encoder.num_layers = six\n").find("integer") != std::string::npos);
  CHECK(message("train.learning_rate = fast\n").find("number") != std::string::npos);
  CHECK(message("encoder.positional_encoding = maybe\n").find("true or false") !=
        std::string::npos);
  CHECK(!message("encoder.exit_layers = 2,4,8\n").empty());
  CHECK(!message("loss.exit_weights = 1,1\n").empty());
  CHECK(!message("compare.noee_depths = 3\n").empty());
  CHECK(!message("decode.beam = 2\n").empty());
  CHECK(!message("policy.metric = loudness\n").empty());
}

TEST_CASE("written configs parse back to the same settings") {
  const ExperimentConfig c = Parse(
      "encoder.exit_layers = 1,3,6\nloss.exit_weights = 0.5,1,2\n"
      "policy.thresholds = 0.01,0.1\ntrain.learning_rate = 0.00123\n");
  std::stringstream ss;
  WriteConfig(ss, c);
  const ExperimentConfig back = ParseConfig(ss);
  std::stringstream again;
  WriteConfig(again, back);
  std::stringstream first;
  WriteConfig(first, c);
  CHECK(again.str() == first.str());
  CHECK(back.loss.exit_weights == std::vector<double>{0.5, 1, 2});
  CHECK(back.train.learning_rate == 0.00123);
}

TEST_CASE("overrides apply after the file") {
  const ExperimentConfig c =
      LoadConfigFile("", {{"train.steps", "7"}, {"encoder.num_heads", "2"}});
  CHECK(c.train.steps == 7);
  CHECK(c.encoder.num_heads == 2);
  CHECK_THROWS_AS(LoadConfigFile("/nonexistent/x.conf"), ConfigError);
}

TEST_CASE("snapshot round trip is exact") {
  ParamStore ps;
  ps.AddUniform("b.layer", {3, 4}, 4, 1);
  ps.AddUniform("a", {5}, 5, 1);
  ps.Add("c", Tensor::Matrix(1, 2, {1e-300, -0.1}));
  std::stringstream ss;
  ps.Save(ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 6) == "EESEQ1");
  ParamStore back = ParamStore::Load(ss);
  CHECK(back.Names() == ps.Names());
  for (const std::string& n : ps.Names()) CHECK(back.Get(n).value == ps.Get(n).value);
  std::stringstream again;
  back.Save(again);
  CHECK(again.str() == bytes);
}

TEST_CASE("corrupt snapshots are rejected") {
  ParamStore ps;
  ps.AddUniform("w", {2, 2}, 2, 1);
  std::stringstream ss;
  ps.Save(ss);
  const std::string bytes = ss.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ParamStore::Load(truncated), FormatError);
  std::istringstream magic("EESEQ9" + bytes.substr(6));
  CHECK_THROWS_AS(ParamStore::Load(magic), FormatError);
  CHECK_THROWS_AS(ParamStore::LoadFile("/nonexistent/model.bin"), FormatError);
}

TEST_CASE("initialization is keyed by seed and name") {
  ParamStore a, b;
  a.AddUniform("x", {10}, 4, 3);
  a.AddUniform("y", {10}, 4, 3);
  b.AddUniform("y", {10}, 4, 3);
  CHECK(a.Get("y").value == b.Get("y").value);
  CHECK(!(a.Get("x").value == a.Get("y").value));
  for (double v : a.Get("x").value.data()) {
    CHECK(v >= -0.5);
    CHECK(v < 0.5);
  }
  CHECK_THROWS_AS(a.AddUniform("x", {1}, 1, 1), ConfigError);
}

}  // namespace
}  // namespace eeseq
