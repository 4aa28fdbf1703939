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

#include "eeseq/corpus.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eeseq/errors.h"
#include "eeseq/rng.h"

namespace eeseq {

void CorpusSpec::Validate() const {
  if (vocab_size < 1 || vocab_size > kMaxVocab)
    throw ConfigError("corpus.vocab_size must be in 1.." + std::to_string(kMaxVocab));
  if (feature_dim < 1) throw ConfigError("corpus.feature_dim must be >= 1");
  if (num_train < 0 || num_dev < 0 || num_test < 0)
    throw ConfigError("corpus split sizes must be >= 0");
  if (min_tokens < 1 || max_tokens < min_tokens)
    throw ConfigError("corpus token range invalid");
  if (min_duration < 1 || max_duration < min_duration)
    throw ConfigError("corpus duration range invalid");
  if (max_gap < 0 || repeat_gap < 0) throw ConfigError("corpus gaps must be >= 0");
  if (noise_easy < 0 || noise_hard < 0) throw ConfigError("noise must be >= 0");
  if (easy_fraction < 0 || easy_fraction > 1)
    throw ConfigError("corpus.easy_fraction must be in [0, 1]");
}

std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "'");
}

std::vector<const FeatureUtterance*> SyntheticCorpus::Select(Split s) const {
  std::vector<const FeatureUtterance*> out;
  for (const auto& u : utterances)
    if (u.split == s) out.push_back(&u);
  return out;
}

// 'a'..'z' then '0'..'9'.
char TokenChar(int token) {
  return token <= 26 ? static_cast<char>('a' + token - 1)
                     : static_cast<char>('0' + token - 27);
}

int CharToken(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a' + 1;
  if (c >= '0' && c <= '9') return c - '0' + 27;
  return 0;
}

std::string Transcript(std::span<const int> tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += TokenChar(tokens[i]);
  }
  return s;
}

std::vector<int> ParseTranscript(const std::string& text, int vocab_size) {
  std::istringstream is(text);
  std::vector<int> out;
  std::string w;
  while (is >> w) {
    if (w.size() != 1) throw FormatError("transcript word '" + w + "' is not one character");
    const int t = CharToken(w[0]);
    if (t < 1 || t > vocab_size)
      throw FormatError("transcript character '" + w + "' outside vocabulary");
    out.push_back(t);
  }
  return out;
}

Tensor CorpusPrototypes(const CorpusSpec& spec, std::uint64_t seed) {
  const auto V = static_cast<std::size_t>(spec.vocab_size);
  const auto d = static_cast<std::size_t>(spec.feature_dim);
  Tensor protos(Shape{V + 1, d});
  Rng rng = Rng::ForKey(seed, "prototypes");
  for (double& v : protos.data()) v = spec.prototype_scale * rng.Normal();
  return protos;
}

SyntheticCorpus GenerateCorpus(const CorpusSpec& spec, std::uint64_t seed) {
  spec.Validate();
  const Tensor protos = CorpusPrototypes(spec, seed);
  const auto d = static_cast<std::size_t>(spec.feature_dim);
  Rng rng = Rng::ForKey(seed, "utterances");
  SyntheticCorpus corpus;
  corpus.vocab_size = spec.vocab_size;
  corpus.feature_dim = spec.feature_dim;
  const int total = spec.num_train + spec.num_dev + spec.num_test;
  for (int i = 0; i < total; ++i) {
    FeatureUtterance u;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05d", i);
    u.id = id;
    u.split = i < spec.num_train                 ? Split::kTrain
              : i < spec.num_train + spec.num_dev ? Split::kDev
                                                  : Split::kTest;
    u.easy = rng.Uniform() < spec.easy_fraction;
    const double noise = u.easy ? spec.noise_easy : spec.noise_hard;
    const int n = rng.UniformInt(spec.min_tokens, spec.max_tokens);
    for (int k = 0; k < n; ++k) u.tokens.push_back(rng.UniformInt(1, spec.vocab_size));

    // Frame plan: prototype row per frame.
    std::vector<std::size_t> plan;
    auto silence = [&](int frames) { plan.insert(plan.end(), frames, 0); };
    silence(rng.UniformInt(0, spec.max_gap));
    for (int k = 0; k < n; ++k) {
      if (k > 0) {
        int gap = rng.UniformInt(0, spec.max_gap);
        if (u.tokens[k] == u.tokens[k - 1]) gap = std::max(gap, spec.repeat_gap);
        silence(gap);
      }
      const int dur = rng.UniformInt(spec.min_duration, spec.max_duration);
      plan.insert(plan.end(), dur, static_cast<std::size_t>(u.tokens[k]));
    }
    silence(rng.UniformInt(0, spec.max_gap));

    u.features = Tensor(Shape{plan.size(), d});
    for (std::size_t t = 0; t < plan.size(); ++t)
      for (std::size_t c = 0; c < d; ++c) {
        double v = protos(plan[t], c);
        if (noise > 0.0) v += noise * rng.Normal();
        u.features(t, c) = v;
      }
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

void WriteCorpus(std::ostream& os, const SyntheticCorpus& corpus) {
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& u : corpus.utterances) ++counts[static_cast<int>(u.split)];
  os << "eeseq-corpus 1\n";
  os << "vocab ";
  for (int t = 1; t <= corpus.vocab_size; ++t) os << TokenChar(t);
  os << "\ndim " << corpus.feature_dim << "\n";
  os << "utterances " << corpus.utterances.size() << " train " << counts[0]
     << " dev " << counts[1] << " test " << counts[2] << "\n";
  char buf[64];
  for (const auto& u : corpus.utterances) {
    os << "utt " << u.id << ' ' << SplitName(u.split) << ' '
       << (u.easy ? "easy" : "hard") << '\n';
    os << "text " << Transcript(u.tokens) << '\n';
    os << "frames " << u.features.rows() << '\n';
    for (std::size_t t = 0; t < u.features.rows(); ++t) {
      for (std::size_t c = 0; c < u.features.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", u.features(t, c));
        if (c) os << ' ';
        os << buf;
      }
      os << '\n';
    }
  }
  if (!os) throw FormatError("failed writing corpus");
}

namespace {

std::string ExpectLine(std::istream& is, const std::string& keyword,
                       std::size_t& lineno) {
  std::string line;
  if (!std::getline(is, line))
    throw FormatError("corpus ended early, expected '" + keyword + "'");
  ++lineno;
  if (line.rfind(keyword, 0) != 0)
    throw FormatError("corpus line " + std::to_string(lineno) + ": expected '" +
                      keyword + "'");
  return line.size() > keyword.size() ? line.substr(keyword.size() + 1) : "";
}

}  // namespace

SyntheticCorpus ReadCorpus(std::istream& is) {
  std::size_t lineno = 0;
  if (ExpectLine(is, "eeseq-corpus", lineno) != "1")
    throw FormatError("unsupported corpus version");
  SyntheticCorpus corpus;
  const std::string vocab = ExpectLine(is, "vocab", lineno);
  corpus.vocab_size = static_cast<int>(vocab.size());
  for (int t = 1; t <= corpus.vocab_size; ++t)
    if (vocab[static_cast<std::size_t>(t - 1)] != TokenChar(t))
      throw FormatError("corpus vocabulary must be the symbols a..z0..9 in order");
  corpus.feature_dim = std::stoi(ExpectLine(is, "dim", lineno));
  if (corpus.vocab_size < 1 || corpus.feature_dim < 1)
    throw FormatError("corpus header has empty vocabulary or dimension");
  std::istringstream counts(ExpectLine(is, "utterances", lineno));
  std::size_t n = 0;
  if (!(counts >> n)) throw FormatError("bad utterance count");
  const auto d = static_cast<std::size_t>(corpus.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureUtterance u;
    std::istringstream head(ExpectLine(is, "utt", lineno));
    std::string split, difficulty;
    if (!(head >> u.id >> split >> difficulty))
      throw FormatError("bad utterance header at line " + std::to_string(lineno));
    u.split = ParseSplit(split);
    if (difficulty != "easy" && difficulty != "hard")
      throw FormatError("bad difficulty '" + difficulty + "'");
    u.easy = difficulty == "easy";
    u.tokens = ParseTranscript(ExpectLine(is, "text", lineno), corpus.vocab_size);
    const std::size_t T = std::stoul(ExpectLine(is, "frames", lineno));
    if (T == 0) throw FormatError("utterance " + u.id + " has no frames");
    std::vector<double> data(T * d);
    for (std::size_t t = 0; t < T; ++t) {
      std::string line;
      if (!std::getline(is, line)) throw FormatError("corpus truncated in " + u.id);
      ++lineno;
      std::istringstream row(line);
      for (std::size_t c = 0; c < d; ++c)
        if (!(row >> data[t * d + c]))
          throw FormatError("corpus line " + std::to_string(lineno) +
                            ": expected " + std::to_string(d) + " values");
    }
    u.features = Tensor(Shape{T, d}, std::move(data));
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

void WriteCorpusFile(const std::string& path, const SyntheticCorpus& corpus) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  WriteCorpus(os, corpus);
}

SyntheticCorpus ReadCorpusFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  return ReadCorpus(is);
}

}  // namespace eeseq
