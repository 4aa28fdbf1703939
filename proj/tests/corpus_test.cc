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

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "eeseq/corpus.h"
#include "eeseq/errors.h"

namespace eeseq {
namespace {

CorpusSpec Spec(int n) {
  CorpusSpec s;
  s.num_train = n;
  s.num_dev = n / 4;
  s.num_test = n / 4;
  return s;
}

std::size_t RowOf(const Tensor& protos, std::span<const double> frame) {
  for (std::size_t r = 0; r < protos.rows(); ++r)
    if (std::equal(frame.begin(), frame.end(), protos.row(r).begin())) return r;
  return protos.rows();
}

TEST_CASE("noise zero gives prototype frames") {
  CorpusSpec s = Spec(40);
  s.noise_easy = s.noise_hard = 0.0;
  const SyntheticCorpus c = GenerateCorpus(s, 3);
  const Tensor protos = CorpusPrototypes(s, 3);
  for (const FeatureUtterance& u : c.utterances)
    for (std::size_t t = 0; t < u.features.rows(); ++t)
      CHECK(RowOf(protos, u.features.row(t)) < protos.rows());
}

TEST_CASE("same seed gives identical corpora") {
  const SyntheticCorpus a = GenerateCorpus(Spec(40), 11);
  const SyntheticCorpus b = GenerateCorpus(Spec(40), 11);
  REQUIRE(a.utterances.size() == b.utterances.size());
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    CHECK(a.utterances[i].tokens == b.utterances[i].tokens);
    CHECK(a.utterances[i].features == b.utterances[i].features);
  }
  const SyntheticCorpus c = GenerateCorpus(Spec(40), 12);
  CHECK(!(c.utterances[0].features == a.utterances[0].features));
}

// Recovers the frame plan from noiseless frames and checks every token
// run, gap and transcript.
TEST_CASE("token durations and gaps respected on 1000 utterances") {
  CorpusSpec s;
  s.num_train = 1000;
  s.num_dev = s.num_test = 0;
  s.noise_easy = s.noise_hard = 0.0;
  const SyntheticCorpus c = GenerateCorpus(s, 5);
  const Tensor protos = CorpusPrototypes(s, 5);
  REQUIRE(c.utterances.size() == 1000);
  for (const FeatureUtterance& u : c.utterances) {
    std::vector<std::pair<std::size_t, int>> runs;
    for (std::size_t t = 0; t < u.features.rows(); ++t) {
      const std::size_t r = RowOf(protos, u.features.row(t));
      if (!runs.empty() && runs.back().first == r) ++runs.back().second;
      else runs.push_back({r, 1});
    }
    std::vector<int> tokens;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto [row, len] = runs[i];
      if (row == 0) {
        CHECK(len <= std::max(s.max_gap, s.repeat_gap));
        continue;
      }
      CHECK(len >= s.min_duration);
      CHECK(len <= s.max_duration);
      if (row == prev) {
        // Repeats are separated by at least repeat_gap silence frames.
        REQUIRE(i > 0);
        CHECK(runs[i - 1].first == 0);
        CHECK(runs[i - 1].second >= s.repeat_gap);
      }
      tokens.push_back(static_cast<int>(row));
      prev = row;
    }
    CHECK(tokens == u.tokens);
    CHECK(static_cast<int>(u.tokens.size()) >= s.min_tokens);
    CHECK(static_cast<int>(u.tokens.size()) <= s.max_tokens);
  }
}

TEST_CASE("splits are disjoint and sized") {
  const SyntheticCorpus c = GenerateCorpus(Spec(40), 1);
  CHECK(c.Select(Split::kTrain).size() == 40);
  CHECK(c.Select(Split::kDev).size() == 10);
  CHECK(c.Select(Split::kTest).size() == 10);
  std::set<std::string> ids;
  for (const auto& u : c.utterances) ids.insert(u.id);
  CHECK(ids.size() == c.utterances.size());
}

TEST_CASE("difficulty mix") {
  CorpusSpec s = Spec(400);
  s.easy_fraction = 1.0;
  for (const auto& u : GenerateCorpus(s, 1).utterances) CHECK(u.easy);
  s.easy_fraction = 0.0;
  for (const auto& u : GenerateCorpus(s, 1).utterances) CHECK(!u.easy);
}

TEST_CASE("corpus text round trip") {
  const SyntheticCorpus c = GenerateCorpus(Spec(8), 2);
  std::stringstream ss;
  WriteCorpus(ss, c);
  const SyntheticCorpus back = ReadCorpus(ss);
  CHECK(back.vocab_size == c.vocab_size);
  CHECK(back.feature_dim == c.feature_dim);
  REQUIRE(back.utterances.size() == c.utterances.size());
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    CHECK(back.utterances[i].id == c.utterances[i].id);
    CHECK(back.utterances[i].split == c.utterances[i].split);
    CHECK(back.utterances[i].easy == c.utterances[i].easy);
    CHECK(back.utterances[i].tokens == c.utterances[i].tokens);
    CHECK(back.utterances[i].features == c.utterances[i].features);
  }
}

TEST_CASE("malformed corpus text") {
  std::istringstream bad_magic("something else\n");
  CHECK_THROWS_AS(ReadCorpus(bad_magic), FormatError);
  std::istringstream truncated(
      "eeseq-corpus 1\nvocab ab\ndim 2\nutterances 1 train 1 dev 0 test 0\n"
      "utt u0 train easy\ntext a b\nframes 3\n0 0\n");
  CHECK_THROWS_AS(ReadCorpus(truncated), FormatError);
}

TEST_CASE("transcripts") {
  CHECK(Transcript(std::vector<int>{1, 2, 3}) == "a b c");
  CHECK(ParseTranscript("a b c", 3) == std::vector<int>{1, 2, 3});
  CHECK_THROWS(ParseTranscript("a z", 3));
  for (int t = 1; t <= kMaxVocab; ++t) CHECK(CharToken(TokenChar(t)) == t);
  CHECK(TokenChar(30) == '3');
}

TEST_CASE("spec validation") {
  CorpusSpec s;
  s.min_tokens = 5;
  s.max_tokens = 3;
  CHECK_THROWS_AS(s.Validate(), ConfigError);
  s = CorpusSpec{};
  s.vocab_size = 37;
  CHECK_THROWS_AS(s.Validate(), ConfigError);
}

}  // namespace
}  // namespace eeseq
