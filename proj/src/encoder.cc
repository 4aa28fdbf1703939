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

#include "eeseq/encoder.h"

#include <cmath>

#include "eeseq/errors.h"
#include "eeseq/ops.h"

namespace eeseq {

namespace {

constexpr int kSubsampleKernel = 3;
constexpr double kMaskedScore = -1e9;

bool IsPowerOfTwo(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string LayerPrefix(int layer) { return "L" + std::to_string(layer); }

int SubsampleStages(int factor) {
  int n = 0;
  while ((1 << n) < factor) ++n;
  return n;
}

Tensor CausalMask(std::size_t n) {
  Tensor m(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = kMaskedScore;
  return m;
}

}  // namespace

std::string HeadKindName(HeadKind k) {
  return k == HeadKind::kCtc ? "ctc" : "aed";
}

HeadKind ParseHeadKind(const std::string& s) {
  if (s == "ctc" || s == "linear-ctc") return HeadKind::kCtc;
  if (s == "aed" || s == "attention-aed") return HeadKind::kAed;
  throw ConfigError("unknown head kind '" + s + "' (expected ctc or aed)");
}

void EncoderConfig::Validate() const {
  if (input_dim < 1) throw ConfigError("encoder.input_dim must be >= 1");
  if (num_layers < 1) throw ConfigError("encoder.num_layers must be >= 1");
  if (exit_layers.empty()) throw ConfigError("encoder.exit_layers is empty");
  for (std::size_t i = 0; i < exit_layers.size(); ++i) {
    if (exit_layers[i] < 1 || exit_layers[i] > num_layers)
      throw ConfigError("exit layer " + std::to_string(exit_layers[i]) +
                        " outside 1.." + std::to_string(num_layers));
    if (i > 0 && exit_layers[i] <= exit_layers[i - 1])
      throw ConfigError("encoder.exit_layers must be strictly increasing");
  }
  if (attn_dim < 1 || num_heads < 1 || attn_dim % num_heads != 0)
    throw ConfigError("encoder.attn_dim must be divisible by encoder.num_heads");
  if (ff_dim < 1) throw ConfigError("encoder.ff_dim must be >= 1");
  if (conv_kernel < 1 || conv_kernel % 2 == 0)
    throw ConfigError("encoder.conv_kernel must be odd");
  if (!IsPowerOfTwo(subsample_factor))
    throw ConfigError("encoder.subsample_factor must be a power of two");
  if (vocab_size < 1) throw ConfigError("encoder.vocab_size must be >= 1");
  if (!head_kinds.empty() && head_kinds.size() != exit_layers.size())
    throw ConfigError("encoder.head_kinds needs one entry per exit");
}

bool EncoderConfig::uses_aed() const {
  for (HeadKind k : head_kinds)
    if (k == HeadKind::kAed) return true;
  return false;
}

std::size_t EncoderConfig::SubsampledFrames(std::size_t frames) const {
  const auto f = static_cast<std::size_t>(subsample_factor);
  return (frames + f - 1) / f;
}

Tensor SinusoidalPositions(std::size_t frames, std::size_t dim) {
  Tensor pe(Shape{frames, dim});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double a = static_cast<double>(t) * rate;
      pe(t, i) = (i % 2 == 0) ? std::sin(a) : std::cos(a);
    }
  return pe;
}

EarlyExitEncoder::EarlyExitEncoder(EncoderConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  Build();
}

EarlyExitEncoder::EarlyExitEncoder(EncoderConfig config,
                                   const ParamStore& params)
    : config_(std::move(config)), params_(params) {
  config_.Validate();
  CheckParams();
}

std::string EarlyExitEncoder::ExitPrefix(std::size_t exit) const {
  return "exit" + std::to_string(config_.exit_layers[exit]);
}

void EarlyExitEncoder::Build() {
  const auto D = static_cast<std::size_t>(config_.attn_dim);
  const auto F = static_cast<std::size_t>(config_.ff_dim);
  const auto K = static_cast<std::size_t>(config_.conv_kernel);
  const auto d = static_cast<std::size_t>(config_.input_dim);
  const std::uint64_t seed = config_.seed;
  auto linear = [&](const std::string& p, std::size_t in, std::size_t out) {
    params_.AddUniform(p + ".w", {in, out}, in, seed);
    params_.AddUniform(p + ".b", {out}, in, seed);
  };
  auto norm = [&](const std::string& p, std::size_t dim) {
    params_.Add(p + ".g", Tensor(Shape{dim}, 1.0));
    params_.Add(p + ".b", Tensor(Shape{dim}, 0.0));
  };
  auto ff = [&](const std::string& p) {
    norm(p + ".ln", D);
    linear(p + ".w1", D, F);
    linear(p + ".w2", F, D);
  };
  auto attention = [&](const std::string& p) {
    for (const char* m : {".q", ".k", ".v", ".o"}) linear(p + m, D, D);
  };

  linear("sub.proj", d, D);
  for (int s = 0; s < SubsampleStages(config_.subsample_factor); ++s) {
    const std::string p = "sub.conv" + std::to_string(s);
    params_.AddUniform(p + ".k", {kSubsampleKernel, D}, kSubsampleKernel, seed);
    params_.AddUniform(p + ".b", {D}, kSubsampleKernel, seed);
  }
  for (int l = 1; l <= config_.num_layers; ++l) {
    const std::string p = LayerPrefix(l);
    ff(p + ".ff1");
    norm(p + ".mhsa.ln", D);
    attention(p + ".mhsa");
    norm(p + ".conv.ln", D);
    linear(p + ".conv.pw1", D, D);
    params_.AddUniform(p + ".conv.dw.k", {K, D}, K, seed);
    params_.AddUniform(p + ".conv.dw.b", {D}, K, seed);
    linear(p + ".conv.pw2", D, D);
    ff(p + ".ff2");
    norm(p + ".out", D);
  }
  const auto G = static_cast<std::size_t>(config_.grid_size());
  const auto Vd = static_cast<std::size_t>(config_.decoder_size());
  for (std::size_t e = 0; e < config_.num_exits(); ++e) {
    const std::string p = ExitPrefix(e);
    linear(p + ".ctc", D, G);
    if (config_.head_kind(e) != HeadKind::kAed) continue;
    params_.AddUniform(p + ".dec.emb",
                       {static_cast<std::size_t>(config_.eos()) + 1, D}, D,
                       seed);
    norm(p + ".dec.sa.ln", D);
    attention(p + ".dec.sa");
    norm(p + ".dec.ca.ln", D);
    attention(p + ".dec.ca");
    ff(p + ".dec.ff");
    norm(p + ".dec.out.ln", D);
    linear(p + ".dec.out", D, Vd);
  }
}

void EarlyExitEncoder::CheckParams() const {
  EarlyExitEncoder reference(config_);
  const ParamStore& want = reference.params();
  if (want.Names() != params_.Names())
    throw ConfigError("snapshot parameters do not match the encoder config");
  for (const std::string& n : want.Names())
    if (want.Get(n).value.shape() != params_.Get(n).value.shape())
      throw ConfigError("snapshot parameter " + n + " has shape " +
                        ShapeString(params_.Get(n).value.shape()) +
                        ", config expects " +
                        ShapeString(want.Get(n).value.shape()));
}

std::size_t EarlyExitEncoder::SubnetworkSize(std::size_t exit) const {
  const int top = config_.exit_layers.at(exit);
  const std::string head = ExitPrefix(exit) + ".";
  std::size_t n = 0;
  params_.ForEach([&](const Parameter& p) {
    bool used = p.name.rfind("sub.", 0) == 0 || p.name.rfind(head, 0) == 0;
    for (int l = 1; l <= top && !used; ++l)
      used = p.name.rfind(LayerPrefix(l) + ".", 0) == 0;
    if (used) n += p.value.size();
  });
  return n;
}

Var EarlyExitEncoder::P(Graph& g, const std::string& name) {
  return g.Param(params_.Get(name));
}

Var EarlyExitEncoder::Linear(Graph& g, const std::string& prefix, Var x) {
  return AddBias(MatMul(x, P(g, prefix + ".w")), P(g, prefix + ".b"));
}

Var EarlyExitEncoder::Norm(Graph& g, const std::string& prefix, Var x) {
  return LayerNorm(x, P(g, prefix + ".g"), P(g, prefix + ".b"));
}

Var EarlyExitEncoder::FeedForward(Graph& g, const std::string& prefix, Var x) {
  Var h = Norm(g, prefix + ".ln", x);
  h = Swish(Linear(g, prefix + ".w1", h));
  return Linear(g, prefix + ".w2", h);
}

Var EarlyExitEncoder::Attention(Graph& g, const std::string& prefix, Var query,
                                Var memory, const Tensor* mask) {
  const auto H = static_cast<std::size_t>(config_.num_heads);
  const std::size_t dk = static_cast<std::size_t>(config_.attn_dim) / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Var q = Linear(g, prefix + ".q", query);
  Var k = Linear(g, prefix + ".k", memory);
  Var v = Linear(g, prefix + ".v", memory);
  Var mask_var;
  if (mask) mask_var = g.Constant(*mask);
  std::vector<Var> heads;
  heads.reserve(H);
  for (std::size_t h = 0; h < H; ++h) {
    Var qh = SliceCols(q, h * dk, dk);
    Var kh = SliceCols(k, h * dk, dk);
    Var vh = SliceCols(v, h * dk, dk);
    Var scores = Scale(MatMul(qh, Transpose(kh)), scale);
    if (mask) scores = Add(scores, mask_var);
    heads.push_back(MatMul(Softmax(scores), vh));
  }
  Var joined = H == 1 ? heads[0] : ConcatCols(heads);
  return Linear(g, prefix + ".o", joined);
}

Var EarlyExitEncoder::ConvModule(Graph& g, const std::string& prefix, Var x) {
  Var h = Norm(g, prefix + ".ln", x);
  h = Swish(Linear(g, prefix + ".pw1", h));
  h = DepthwiseConv1d(h, P(g, prefix + ".dw.k"), 1);
  h = Swish(AddBias(h, P(g, prefix + ".dw.b")));
  return Linear(g, prefix + ".pw2", h);
}

Var EarlyExitEncoder::Block(Graph& g, int layer, Var h) {
  const std::string p = LayerPrefix(layer);
  h = Add(h, Scale(FeedForward(g, p + ".ff1", h), 0.5));
  Var a = Norm(g, p + ".mhsa.ln", h);
  h = Add(h, Attention(g, p + ".mhsa", a, a, nullptr));
  h = Add(h, ConvModule(g, p + ".conv", h));
  h = Add(h, Scale(FeedForward(g, p + ".ff2", h), 0.5));
  return Norm(g, p + ".out", h);
}

Var EarlyExitEncoder::Subsample(Graph& g, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != static_cast<std::size_t>(config_.input_dim))
    throw DimensionError("encoder input must be [T x " +
                         std::to_string(config_.input_dim) + "], got " +
                         ShapeString(x.shape()));
  if (x.rows() < static_cast<std::size_t>(config_.subsample_factor))
    throw InputTooShortError("input has " + std::to_string(x.rows()) +
                             " frames, subsampling needs at least " +
                             std::to_string(config_.subsample_factor));
  if (!x.AllFinite()) throw NumericError("encoder input is not finite");
  Var h = Linear(g, "sub.proj", g.Constant(x));
  for (int s = 0; s < SubsampleStages(config_.subsample_factor); ++s) {
    const std::string p = "sub.conv" + std::to_string(s);
    h = DepthwiseConv1d(h, P(g, p + ".k"), 2);
    h = Swish(AddBias(h, P(g, p + ".b")));
  }
  if (config_.positional_encoding)
    h = Add(h, g.Constant(SinusoidalPositions(
                   h.rows(), static_cast<std::size_t>(config_.attn_dim))));
  return h;
}

Var EarlyExitEncoder::RunLayers(Graph& g, Var h, int from_layer, int to_layer) {
  for (int l = from_layer + 1; l <= to_layer; ++l) {
    h = Block(g, l, h);
    if (!h.value().AllFinite())
      throw NumericError("non-finite activation at layer " + std::to_string(l));
  }
  return h;
}

Var EarlyExitEncoder::CtcHead(Graph& g, std::size_t exit, Var states) {
  return LogSoftmax(Linear(g, ExitPrefix(exit) + ".ctc", states));
}

ExitOutputs EarlyExitEncoder::EncodeWithTaps(Graph& g, const Tensor& x,
                                             int max_layer) {
  if (max_layer < 0) max_layer = config_.num_layers;
  IncrementalEncoder inc(*this, g, x);
  ExitOutputs out;
  out.frames = inc.frames();
  while (!inc.Done() &&
         config_.exit_layers[out.exits.size()] <= max_layer)
    out.exits.push_back(inc.Next());
  return out;
}

Var EarlyExitEncoder::DecoderForward(Graph& g, std::size_t exit, Var states,
                                     std::span<const int> inputs) {
  if (config_.head_kind(exit) != HeadKind::kAed)
    throw ConfigError("exit " + std::to_string(exit + 1) +
                      " has no attention decoder");
  if (states.rows() == 0 || states.value().empty())
    throw DimensionError("decoder needs non-empty encoder states");
  if (inputs.empty()) throw DimensionError("decoder needs a start symbol");
  for (int t : inputs)
    if (t < 1 || t > config_.eos())
      throw DimensionError("decoder input token " + std::to_string(t) +
                           " not in vocabulary");
  const std::string p = ExitPrefix(exit) + ".dec";
  Var x = GatherRows(P(g, p + ".emb"), inputs);
  if (config_.positional_encoding)
    x = Add(x, g.Constant(SinusoidalPositions(
                   inputs.size(), static_cast<std::size_t>(config_.attn_dim))));
  const Tensor mask = CausalMask(inputs.size());
  Var a = Norm(g, p + ".sa.ln", x);
  x = Add(x, Attention(g, p + ".sa", a, a, &mask));
  Var c = Norm(g, p + ".ca.ln", x);
  x = Add(x, Attention(g, p + ".ca", c, states, nullptr));
  x = Add(x, FeedForward(g, p + ".ff", x));
  x = Norm(g, p + ".out.ln", x);
  return LogSoftmax(Linear(g, p + ".out", x));
}

Var EarlyExitEncoder::DecoderStep(Graph& g, std::size_t exit, Var states,
                                  std::span<const int> prefix) {
  std::vector<int> inputs;
  inputs.reserve(prefix.size() + 1);
  inputs.push_back(config_.eos());
  for (int t : prefix) {
    if (t < 1 || t > config_.vocab_size)
      throw DimensionError("prefix token " + std::to_string(t) +
                           " not in vocabulary");
    inputs.push_back(t);
  }
  Var all = DecoderForward(g, exit, states, inputs);
  const int last[] = {static_cast<int>(inputs.size()) - 1};
  return GatherRows(all, last);
}

IncrementalEncoder::IncrementalEncoder(EarlyExitEncoder& model, Graph& g,
                                       const Tensor& x)
    : model_(model), graph_(g) {
  h_ = model_.Subsample(g, x);
  frames_ = h_.rows();
}

ExitOutput IncrementalEncoder::Next() {
  if (Done()) throw StateError("all exits already computed");
  const int target = model_.config().exit_layers[next_exit_];
  h_ = model_.RunLayers(graph_, h_, layer_, target);
  layer_ = target;
  ExitOutput out;
  out.exit_index = next_exit_;
  out.layer = target;
  out.states = h_;
  out.log_grid = model_.CtcHead(graph_, next_exit_, h_);
  ++next_exit_;
  return out;
}

}  // namespace eeseq
