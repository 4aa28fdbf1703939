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

#ifndef EESEQ_ENCODER_H_
#define EESEQ_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eeseq/graph.h"
#include "eeseq/params.h"

namespace eeseq {

enum class HeadKind { kCtc, kAed };

std::string HeadKindName(HeadKind k);
HeadKind ParseHeadKind(const std::string& s);

// Token ids: 0 is the CTC blank, 1..vocab_size are characters and
// vocab_size + 1 is end-of-sequence (also used as the decoder start symbol).
// CTC grids have vocab_size + 1 columns (blank + characters). Decoder
// distributions have vocab_size + 1 columns too, column c standing for token
// c + 1, so the last column is end-of-sequence.
struct EncoderConfig {
  int input_dim = 16;
  int num_layers = 6;
  std::vector<int> exit_layers = {2, 4, 6};
  int attn_dim = 64;
  int num_heads = 4;
  int ff_dim = 128;
  int conv_kernel = 7;
  int subsample_factor = 2;
  int vocab_size = 8;
  std::vector<HeadKind> head_kinds;  // one per exit; empty means all CTC
  bool positional_encoding = true;
  std::uint64_t seed = 1;

  void Validate() const;
  std::size_t num_exits() const { return exit_layers.size(); }
  int grid_size() const { return vocab_size + 1; }
  int decoder_size() const { return vocab_size + 1; }
  int eos() const { return vocab_size + 1; }
  HeadKind head_kind(std::size_t exit) const {
    return head_kinds.empty() ? HeadKind::kCtc : head_kinds[exit];
  }
  bool uses_aed() const;
  // Frames after subsampling.
  std::size_t SubsampledFrames(std::size_t frames) const;
};

inline int DecoderColumnToken(int col) { return col + 1; }
inline int TokenToDecoderColumn(int token) { return token - 1; }

// States and CTC log-posterior grid of one exit. Vars live on the graph the
// forward pass ran on.
struct ExitOutput {
  std::size_t exit_index = 0;  // 0-based position in exit_layers
  int layer = 0;
  Var states;    // [T' x attn_dim]
  Var log_grid;  // [T' x (vocab_size + 1)]
};

struct ExitOutputs {
  std::vector<ExitOutput> exits;
  std::size_t frames = 0;  // T'
};

// Conformer-lite encoder with a subsampling frontend, sinusoidal positions
// and an exit head after every layer listed in exit_layers. Each exit has
// its own linear CTC head; AED exits additionally own a one-layer
// transformer decoder with cross-attention over the exit states.
//
// Forward methods only read parameters, so several threads may run
// inference graphs over one model. Training (backward + update) needs
// exclusive access.
class EarlyExitEncoder {
 public:
  explicit EarlyExitEncoder(EncoderConfig config);
  // Adopts trained parameters; names and shapes must match `config`.
  EarlyExitEncoder(EncoderConfig config, const ParamStore& params);

  const EncoderConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Number of scalars in the subnetwork used by exit `exit` (frontend,
  // layers up to the exit, and that exit's heads).
  std::size_t SubnetworkSize(std::size_t exit) const;

  // x [T x input_dim] -> [ceil(T / factor) x attn_dim], positions added.
  Var Subsample(Graph& g, const Tensor& x);
  // Conformer blocks from_layer+1 .. to_layer (1-based, inclusive).
  Var RunLayers(Graph& g, Var h, int from_layer, int to_layer);
  Var CtcHead(Graph& g, std::size_t exit, Var states);

  // Runs all blocks once and taps every exit up to `max_layer` (default:
  // all). Exit outputs depend only on blocks at or below their layer.
  ExitOutputs EncodeWithTaps(Graph& g, const Tensor& x, int max_layer = -1);

  // Teacher-forced decoder pass. `inputs` starts with eos (as start symbol)
  // followed by a token prefix; row u is the log-distribution over the next
  // token given inputs[0..u].
  Var DecoderForward(Graph& g, std::size_t exit, Var states,
                     std::span<const int> inputs);
  // Log-distribution [1 x decoder_size] of the next token after `prefix`.
  Var DecoderStep(Graph& g, std::size_t exit, Var states,
                  std::span<const int> prefix);

 private:
  void Build();
  void CheckParams() const;
  Var P(Graph& g, const std::string& name);
  Var Linear(Graph& g, const std::string& prefix, Var x);
  Var Norm(Graph& g, const std::string& prefix, Var x);
  Var FeedForward(Graph& g, const std::string& prefix, Var x);
  Var Attention(Graph& g, const std::string& prefix, Var query, Var memory,
                const Tensor* mask);
  Var ConvModule(Graph& g, const std::string& prefix, Var x);
  Var Block(Graph& g, int layer, Var h);
  std::string ExitPrefix(std::size_t exit) const;

  EncoderConfig config_;
  ParamStore params_;
};

// Stateful driver that advances the encoder one exit at a time, so callers
// can stop as soon as an exit is good enough and only pay for the blocks
// they ran.
class IncrementalEncoder {
 public:
  IncrementalEncoder(EarlyExitEncoder& model, Graph& g, const Tensor& x);

  bool Done() const { return next_exit_ >= model_.config().num_exits(); }
  // Runs the blocks up to the next exit layer and returns that exit.
  ExitOutput Next();
  int layers_executed() const { return layer_; }
  std::size_t frames() const { return frames_; }

 private:
  EarlyExitEncoder& model_;
  Graph& graph_;
  Var h_;
  int layer_ = 0;
  std::size_t next_exit_ = 0;
  std::size_t frames_ = 0;
};

Tensor SinusoidalPositions(std::size_t frames, std::size_t dim);

}  // namespace eeseq

#endif  // EESEQ_ENCODER_H_
