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

// Differentiable primitives. Every op records itself on the graph of its
// first operand; all operands must live on the same graph. Tensors are
// treated as matrices (rows x cols); there is no general broadcasting.

#ifndef EESEQ_OPS_H_
#define EESEQ_OPS_H_

#include <span>
#include <vector>

#include "eeseq/graph.h"

namespace eeseq {

constexpr double kLayerNormEpsilon = 1e-5;

// [R x S] * [S x C] -> [R x C]
Var MatMul(Var a, Var b);
Var Transpose(Var a);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double s);
// x [R x C] + bias [C] broadcast over rows.
Var AddBias(Var x, Var bias);

// Sum of all elements, shape [1].
Var Sum(Var x);
// sum_i w_i * s_i over scalar vars.
Var WeightedSum(std::span<const Var> scalars, std::span<const double> weights);

// Row-wise, over the last axis, with max subtraction.
Var LogSoftmax(Var x);
Var Softmax(Var x);

// Row-wise normalization to zero mean, unit variance (epsilon 1e-5), then
// elementwise gain [C] and bias [C].
Var LayerNorm(Var x, Var gain, Var bias);

// x * sigmoid(x)
Var Swish(Var x);

// x [T x C], kernel [K x C] with K odd, zero "same" padding centred on each
// output position t * stride. Output [ceil(T / stride) x C].
Var DepthwiseConv1d(Var x, Var kernel, std::size_t stride);

Var SliceCols(Var x, std::size_t begin, std::size_t count);
Var ConcatCols(std::span<const Var> parts);

// Rows of table [N x C] selected by index -> [indices.size() x C].
Var GatherRows(Var table, std::span<const int> indices);
// x [R x C] -> [R], element r is x(r, cols[r]).
Var SelectPerRow(Var x, std::span<const int> cols);

}  // namespace eeseq

#endif  // EESEQ_OPS_H_
