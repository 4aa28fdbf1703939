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

#include "eeseq/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "eeseq/errors.h"

namespace eeseq {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long ToInt(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double ToDouble(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string Join(const std::vector<T>& xs, F f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += f(xs[i]);
  }
  return s;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string& key,
                     const std::string& value)>
      set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define EESEQ_INT(NAME, FIELD)                                               \
  Key {                                                                      \
    NAME,                                                                    \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.FIELD = static_cast<decltype(c.FIELD)>(ToInt(k, v));             \
        },                                                                   \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }    \
  }
#define EESEQ_DOUBLE(NAME, FIELD)                                            \
  Key {                                                                      \
    NAME,                                                                    \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.FIELD = ToDouble(k, v);                                          \
        },                                                                   \
        [](const ExperimentConfig& c) { return Num(c.FIELD); }               \
  }

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = {
      Key{"seed",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const auto s = static_cast<std::uint64_t>(ToInt(k, v));
            c.encoder.seed = s;
            c.train.seed = s;
          },
          [](const ExperimentConfig& c) { return std::to_string(c.encoder.seed); }},
      EESEQ_INT("corpus.seed", corpus_seed),
      EESEQ_INT("corpus.vocab_size", corpus.vocab_size),
      EESEQ_INT("corpus.feature_dim", corpus.feature_dim),
      EESEQ_INT("corpus.num_train", corpus.num_train),
      EESEQ_INT("corpus.num_dev", corpus.num_dev),
      EESEQ_INT("corpus.num_test", corpus.num_test),
      EESEQ_INT("corpus.min_tokens", corpus.min_tokens),
      EESEQ_INT("corpus.max_tokens", corpus.max_tokens),
      EESEQ_INT("corpus.min_duration", corpus.min_duration),
      EESEQ_INT("corpus.max_duration", corpus.max_duration),
      EESEQ_INT("corpus.max_gap", corpus.max_gap),
      EESEQ_INT("corpus.repeat_gap", corpus.repeat_gap),
      EESEQ_DOUBLE("corpus.noise_easy", corpus.noise_easy),
      EESEQ_DOUBLE("corpus.noise_hard", corpus.noise_hard),
      EESEQ_DOUBLE("corpus.easy_fraction", corpus.easy_fraction),
      EESEQ_DOUBLE("corpus.prototype_scale", corpus.prototype_scale),
      EESEQ_INT("encoder.num_layers", encoder.num_layers),
      Key{"encoder.exit_layers",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.encoder.exit_layers.clear();
            for (const auto& s : SplitList(v))
              c.encoder.exit_layers.push_back(static_cast<int>(ToInt(k, s)));
          },
          [](const ExperimentConfig& c) {
            return Join(c.encoder.exit_layers, [](int l) { return std::to_string(l); });
          }},
      EESEQ_INT("encoder.attn_dim", encoder.attn_dim),
      EESEQ_INT("encoder.num_heads", encoder.num_heads),
      EESEQ_INT("encoder.ff_dim", encoder.ff_dim),
      EESEQ_INT("encoder.conv_kernel", encoder.conv_kernel),
      EESEQ_INT("encoder.subsample_factor", encoder.subsample_factor),
      Key{"encoder.head_kinds",
          [](ExperimentConfig& c, const std::string&, const std::string& v) {
            c.encoder.head_kinds.clear();
            for (const auto& s : SplitList(v))
              c.encoder.head_kinds.push_back(ParseHeadKind(s));
          },
          [](const ExperimentConfig& c) {
            return Join(c.encoder.head_kinds, HeadKindName);
          }},
      Key{"encoder.positional_encoding",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.encoder.positional_encoding = ToBool(k, v);
          },
          [](const ExperimentConfig& c) {
            return std::string(c.encoder.positional_encoding ? "true" : "false");
          }},
      EESEQ_DOUBLE("loss.lambda_ctc", loss.lambda_ctc),
      EESEQ_DOUBLE("loss.lambda_ce", loss.lambda_ce),
      Key{"loss.exit_weights",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.loss.exit_weights.clear();
            for (const auto& s : SplitList(v))
              c.loss.exit_weights.push_back(ToDouble(k, s));
          },
          [](const ExperimentConfig& c) { return Join(c.loss.exit_weights, Num); }},
      EESEQ_DOUBLE("train.learning_rate", train.learning_rate),
      EESEQ_INT("train.warmup_steps", train.warmup_steps),
      EESEQ_INT("train.steps", train.steps),
      EESEQ_INT("train.batch_size", train.batch_size),
      EESEQ_DOUBLE("train.beta1", train.beta1),
      EESEQ_DOUBLE("train.beta2", train.beta2),
      EESEQ_DOUBLE("train.epsilon", train.epsilon),
      EESEQ_DOUBLE("train.clip_norm", train.clip_norm),
      EESEQ_INT("train.seed", train.seed),
      EESEQ_INT("train.log_every", train.log_every),
      EESEQ_INT("decode.nbest", decode.nbest),
      EESEQ_INT("decode.beam", decode.beam),
      EESEQ_INT("decode.max_len", decode.max_len),
      Key{"policy.metric",
          [](ExperimentConfig& c, const std::string&, const std::string& v) {
            c.policy.metric = ParseMetric(v);
          },
          [](const ExperimentConfig& c) { return MetricName(c.policy.metric); }},
      EESEQ_DOUBLE("policy.threshold", policy.threshold),
      Key{"policy.thresholds",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.policy.thresholds.clear();
            for (const auto& s : SplitList(v))
              c.policy.thresholds.push_back(ToDouble(k, s));
          },
          [](const ExperimentConfig& c) { return Join(c.policy.thresholds, Num); }},
      EESEQ_INT("policy.grid_points", policy.grid_points),
      Key{"compare.seeds",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.compare_seeds.clear();
            for (const auto& s : SplitList(v))
              c.compare_seeds.push_back(static_cast<std::uint64_t>(ToInt(k, s)));
          },
          [](const ExperimentConfig& c) {
            return Join(c.compare_seeds,
                        [](std::uint64_t s) { return std::to_string(s); });
          }},
      Key{"compare.noee_depths",
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.noee_depths.clear();
            for (const auto& s : SplitList(v))
              c.noee_depths.push_back(static_cast<int>(ToInt(k, s)));
          },
          [](const ExperimentConfig& c) {
            return Join(c.noee_depths, [](int l) { return std::to_string(l); });
          }},
  };
  return keys;
}

#undef EESEQ_INT
#undef EESEQ_DOUBLE

}  // namespace

void ExperimentConfig::Finalize() {
  corpus.Validate();
  encoder.input_dim = corpus.feature_dim;
  encoder.vocab_size = corpus.vocab_size;
  encoder.Validate();
  loss.Validate(encoder.num_exits(), encoder.uses_aed());
  if (train.steps < 0 || train.batch_size < 1 || train.warmup_steps < 0)
    throw ConfigError("train.steps/batch_size/warmup_steps out of range");
  if (!(train.learning_rate > 0)) throw ConfigError("train.learning_rate must be > 0");
  if (decode.nbest < 1 || decode.beam < decode.nbest || decode.max_len < 1)
    throw ConfigError("decode.nbest >= 1, decode.beam >= decode.nbest and "
                      "decode.max_len >= 1 required");
  if (compare_seeds.empty()) throw ConfigError("compare.seeds is empty");
  for (int d : noee_depths) {
    bool found = false;
    for (int l : encoder.exit_layers) found = found || l == d;
    if (!found)
      throw ConfigError("compare.noee_depths entry " + std::to_string(d) +
                        " is not an exit layer");
  }
}

std::vector<std::pair<std::string, std::string>> ParseKeyValues(
    std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void ApplySetting(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value) {
  for (const Key& k : Keys())
    if (key == k.name) {
      k.set(cfg, key, value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig ParseConfig(std::istream& is) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : ParseKeyValues(is)) ApplySetting(cfg, k, v);
  cfg.Finalize();
  return cfg;
}

ExperimentConfig LoadConfigFile(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    for (const auto& [k, v] : ParseKeyValues(is)) ApplySetting(cfg, k, v);
  }
  for (const auto& [k, v] : overrides) ApplySetting(cfg, k, v);
  cfg.Finalize();
  return cfg;
}

void WriteConfig(std::ostream& os, const ExperimentConfig& cfg) {
  for (const Key& k : Keys()) os << k.name << " = " << k.get(cfg) << '\n';
}

}  // namespace eeseq
