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

#include "eeseq/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eeseq/errors.h"

namespace eeseq {

namespace {

void CheckSameGraph(Var a, Var b) {
  if (&a.graph() != &b.graph())
    throw StateError("operands belong to different graphs");
}

void CheckSameShape(Var a, Var b, const char* op) {
  CheckSameGraph(a, b);
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeString(a.shape()) + " vs " +
                         ShapeString(b.shape()));
}

Shape MatrixShape(std::size_t r, std::size_t c) { return Shape{r, c}; }

}  // namespace

Var MatMul(Var a, Var b) {
  CheckSameGraph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows())
    throw DimensionError("matmul: cannot multiply " + ShapeString(av.shape()) +
                         " by " + ShapeString(bv.shape()));
  const std::size_t R = av.rows(), S = av.cols(), C = bv.cols();
  Tensor out(MatrixShape(R, C));
  const double* A = av.data().data();
  const double* B = bv.data().data();
  double* O = out.data().data();
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t s = 0; s < S; ++s) {
      const double x = A[r * S + s];
      const double* brow = B + s * C;
      double* orow = O + r * C;
      for (std::size_t c = 0; c < C; ++c) orow[c] += x * brow[c];
    }
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().Record(
      std::move(out), {ia, ib}, [ia, ib, R, S, C](Graph& g, std::size_t self) {
        const double* dO = g.grad(self).data();
        const double* A = g.value(ia).data().data();
        const double* B = g.value(ib).data().data();
        if (g.needs_grad(ia)) {
          double* dA = g.grad(ia).data();
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t s = 0; s < S; ++s) {
              double acc = 0.0;
              const double* brow = B + s * C;
              const double* drow = dO + r * C;
              for (std::size_t c = 0; c < C; ++c) acc += drow[c] * brow[c];
              dA[r * S + s] += acc;
            }
        }
        if (g.needs_grad(ib)) {
          double* dB = g.grad(ib).data();
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t s = 0; s < S; ++s) {
              const double x = A[r * S + s];
              const double* drow = dO + r * C;
              double* dbrow = dB + s * C;
              for (std::size_t c = 0; c < C; ++c) dbrow[c] += x * drow[c];
            }
        }
      });
}

Var Transpose(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 2) throw DimensionError("transpose needs a matrix");
  const std::size_t R = av.rows(), C = av.cols();
  Tensor out(MatrixShape(C, R));
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) out(c, r) = av(r, c);
  const std::size_t ia = a.id();
  return a.graph().Record(std::move(out), {ia},
                          [ia, R, C](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            auto da = g.grad(ia);
                            for (std::size_t r = 0; r < R; ++r)
                              for (std::size_t c = 0; c < C; ++c)
                                da[r * C + c] += d[c * R + r];
                          });
}

Var Add(Var a, Var b) {
  CheckSameShape(a, b, "add");
  Tensor out = a.value();
  auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] += bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().Record(std::move(out), {ia, ib},
                          [ia, ib](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            for (std::size_t in : {ia, ib}) {
                              if (!g.needs_grad(in)) continue;
                              auto di = g.grad(in);
                              for (std::size_t i = 0; i < d.size(); ++i)
                                di[i] += d[i];
                            }
                          });
}

Var Sub(Var a, Var b) {
  CheckSameShape(a, b, "sub");
  Tensor out = a.value();
  auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] -= bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().Record(std::move(out), {ia, ib},
                          [ia, ib](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            if (g.needs_grad(ia)) {
                              auto da = g.grad(ia);
                              for (std::size_t i = 0; i < d.size(); ++i)
                                da[i] += d[i];
                            }
                            if (g.needs_grad(ib)) {
                              auto db = g.grad(ib);
                              for (std::size_t i = 0; i < d.size(); ++i)
                                db[i] -= d[i];
                            }
                          });
}

Var Mul(Var a, Var b) {
  CheckSameShape(a, b, "mul");
  Tensor out = a.value();
  auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] *= bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().Record(
      std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        auto d = g.grad(self);
        auto av = g.value(ia).data();
        auto bv = g.value(ib).data();
        if (g.needs_grad(ia)) {
          auto da = g.grad(ia);
          for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i] * bv[i];
        }
        if (g.needs_grad(ib)) {
          auto db = g.grad(ib);
          for (std::size_t i = 0; i < d.size(); ++i) db[i] += d[i] * av[i];
        }
      });
}

Var Scale(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  const std::size_t ia = a.id();
  return a.graph().Record(std::move(out), {ia},
                          [ia, s](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            auto da = g.grad(ia);
                            for (std::size_t i = 0; i < d.size(); ++i)
                              da[i] += s * d[i];
                          });
}

Var AddBias(Var x, Var bias) {
  CheckSameGraph(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols())
    throw DimensionError("add_bias: bias " + ShapeString(bv.shape()) +
                         " does not match " + ShapeString(xv.shape()));
  Tensor out = xv;
  const std::size_t R = xv.rows(), C = xv.cols();
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) out(r, c) += bv[c];
  const std::size_t ix = x.id(), ib = bias.id();
  return x.graph().Record(std::move(out), {ix, ib},
                          [ix, ib, R, C](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            if (g.needs_grad(ix)) {
                              auto dx = g.grad(ix);
                              for (std::size_t i = 0; i < d.size(); ++i)
                                dx[i] += d[i];
                            }
                            if (g.needs_grad(ib)) {
                              auto db = g.grad(ib);
                              for (std::size_t r = 0; r < R; ++r)
                                for (std::size_t c = 0; c < C; ++c)
                                  db[c] += d[r * C + c];
                            }
                          });
}

Var Sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  return x.graph().Record(Tensor::Scalar(s), {ix},
                          [ix](Graph& g, std::size_t self) {
                            const double d = g.grad(self)[0];
                            for (double& v : g.grad(ix)) v += d;
                          });
}

Var WeightedSum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.empty()) throw DimensionError("weighted_sum of nothing");
  if (scalars.size() != weights.size())
    throw DimensionError("weighted_sum: weight count mismatch");
  double s = 0.0;
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    CheckSameGraph(scalars[0], scalars[i]);
    if (scalars[i].value().size() != 1)
      throw DimensionError("weighted_sum expects scalars");
    s += weights[i] * scalars[i].value()[0];
    ids.push_back(scalars[i].id());
  }
  std::vector<double> w(weights.begin(), weights.end());
  return scalars[0].graph().Record(
      Tensor::Scalar(s), ids, [ids, w](Graph& g, std::size_t self) {
        const double d = g.grad(self)[0];
        for (std::size_t i = 0; i < ids.size(); ++i)
          if (g.needs_grad(ids[i])) g.grad(ids[i])[0] += w[i] * d;
      });
}

Var LogSoftmax(Var x) {
  const Tensor& xv = x.value();
  if (xv.cols() < 1) throw DimensionError("log_softmax over empty axis");
  if (!xv.AllFinite()) throw NumericError("log_softmax: non-finite input");
  Tensor out = xv;
  const std::size_t R = xv.rows(), C = xv.cols();
  for (std::size_t r = 0; r < R; ++r) {
    auto row = out.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    const double lse = m + std::log(s);
    for (double& v : row) v -= lse;
  }
  const std::size_t ix = x.id();
  return x.graph().Record(std::move(out), {ix},
                          [ix, R, C](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            const auto& y = g.value(self);
                            auto dx = g.grad(ix);
                            for (std::size_t r = 0; r < R; ++r) {
                              double s = 0.0;
                              for (std::size_t c = 0; c < C; ++c)
                                s += d[r * C + c];
                              for (std::size_t c = 0; c < C; ++c)
                                dx[r * C + c] +=
                                    d[r * C + c] - std::exp(y(r, c)) * s;
                            }
                          });
}

Var Softmax(Var x) {
  const Tensor& xv = x.value();
  if (!xv.AllFinite()) throw NumericError("softmax: non-finite input");
  Tensor out = xv;
  const std::size_t R = xv.rows(), C = xv.cols();
  for (std::size_t r = 0; r < R; ++r) {
    auto row = out.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double& v : row) {
      v = std::exp(v - m);
      s += v;
    }
    for (double& v : row) v /= s;
  }
  const std::size_t ix = x.id();
  return x.graph().Record(std::move(out), {ix},
                          [ix, R, C](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            const auto& y = g.value(self);
                            auto dx = g.grad(ix);
                            for (std::size_t r = 0; r < R; ++r) {
                              double s = 0.0;
                              for (std::size_t c = 0; c < C; ++c)
                                s += d[r * C + c] * y(r, c);
                              for (std::size_t c = 0; c < C; ++c)
                                dx[r * C + c] += y(r, c) * (d[r * C + c] - s);
                            }
                          });
}

Var LayerNorm(Var x, Var gain, Var bias) {
  CheckSameGraph(x, gain);
  CheckSameGraph(x, bias);
  const Tensor& xv = x.value();
  const std::size_t R = xv.rows(), C = xv.cols();
  if (gain.value().size() != C || bias.value().size() != C)
    throw DimensionError("layer_norm: gain/bias must have " +
                         std::to_string(C) + " elements");
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto row = xv.row(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(C);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(C);
    inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t c = 0; c < C; ++c) xhat(r, c) = (row[c] - mu) * inv_std[r];
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      out(r, c) = gv[c] * xhat(r, c) + bv[c];
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.graph().Record(
      std::move(out), {ix, ig, ib},
      [ix, ig, ib, R, C, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Graph& g, std::size_t self) {
        auto d = g.grad(self);
        const auto& gv = g.value(ig);
        if (g.needs_grad(ig)) {
          auto dg = g.grad(ig);
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
              dg[c] += d[r * C + c] * xhat(r, c);
        }
        if (g.needs_grad(ib)) {
          auto db = g.grad(ib);
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c) db[c] += d[r * C + c];
        }
        if (g.needs_grad(ix)) {
          auto dx = g.grad(ix);
          const double invC = 1.0 / static_cast<double>(C);
          for (std::size_t r = 0; r < R; ++r) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
              const double dh = d[r * C + c] * gv[c];
              mean_d += dh;
              mean_dx += dh * xhat(r, c);
            }
            mean_d *= invC;
            mean_dx *= invC;
            for (std::size_t c = 0; c < C; ++c) {
              const double dh = d[r * C + c] * gv[c];
              dx[r * C + c] +=
                  inv_std[r] * (dh - mean_d - xhat(r, c) * mean_dx);
            }
          }
        }
      });
}

Var Swish(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v / (1.0 + std::exp(-v));
  const std::size_t ix = x.id();
  return x.graph().Record(std::move(out), {ix},
                          [ix](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            auto xv = g.value(ix).data();
                            auto dx = g.grad(ix);
                            for (std::size_t i = 0; i < d.size(); ++i) {
                              const double s = 1.0 / (1.0 + std::exp(-xv[i]));
                              dx[i] += d[i] * (s + xv[i] * s * (1.0 - s));
                            }
                          });
}

Var DepthwiseConv1d(Var x, Var kernel, std::size_t stride) {
  CheckSameGraph(x, kernel);
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  if (xv.rank() != 2 || kv.rank() != 2 || kv.cols() != xv.cols())
    throw DimensionError("depthwise_conv1d: kernel " + ShapeString(kv.shape()) +
                         " incompatible with input " + ShapeString(xv.shape()));
  if (kv.rows() % 2 == 0)
    throw DimensionError("depthwise_conv1d: kernel width must be odd");
  if (stride == 0) throw DimensionError("depthwise_conv1d: stride must be > 0");
  const std::size_t T = xv.rows(), C = xv.cols(), K = kv.rows();
  const std::size_t To = (T + stride - 1) / stride;
  const long half = static_cast<long>(K / 2);
  Tensor out(MatrixShape(To, C));
  for (std::size_t t = 0; t < To; ++t)
    for (std::size_t k = 0; k < K; ++k) {
      const long src = static_cast<long>(t * stride) + static_cast<long>(k) - half;
      if (src < 0 || src >= static_cast<long>(T)) continue;
      for (std::size_t c = 0; c < C; ++c)
        out(t, c) += kv(k, c) * xv(static_cast<std::size_t>(src), c);
    }
  const std::size_t ix = x.id(), ik = kernel.id();
  return x.graph().Record(
      std::move(out), {ix, ik},
      [ix, ik, T, C, K, To, stride, half](Graph& g, std::size_t self) {
        auto d = g.grad(self);
        const auto& xv = g.value(ix);
        const auto& kv = g.value(ik);
        const bool gx = g.needs_grad(ix), gk = g.needs_grad(ik);
        std::span<double> dx, dk;
        if (gx) dx = g.grad(ix);
        if (gk) dk = g.grad(ik);
        for (std::size_t t = 0; t < To; ++t)
          for (std::size_t k = 0; k < K; ++k) {
            const long src =
                static_cast<long>(t * stride) + static_cast<long>(k) - half;
            if (src < 0 || src >= static_cast<long>(T)) continue;
            const auto s = static_cast<std::size_t>(src);
            for (std::size_t c = 0; c < C; ++c) {
              const double dv = d[t * C + c];
              if (gx) dx[s * C + c] += dv * kv(k, c);
              if (gk) dk[k * C + c] += dv * xv(s, c);
            }
          }
      });
}

Var SliceCols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  if (count == 0 || begin + count > xv.cols())
    throw DimensionError("slice_cols out of range");
  const std::size_t R = xv.rows(), C = xv.cols();
  Tensor out(MatrixShape(R, count));
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = xv(r, begin + c);
  const std::size_t ix = x.id();
  return x.graph().Record(std::move(out), {ix},
                          [ix, R, C, begin, count](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            auto dx = g.grad(ix);
                            for (std::size_t r = 0; r < R; ++r)
                              for (std::size_t c = 0; c < count; ++c)
                                dx[r * C + begin + c] += d[r * count + c];
                          });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const std::size_t R = parts[0].rows();
  std::size_t C = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    CheckSameGraph(parts[0], p);
    if (p.rows() != R || p.value().rank() != 2)
      throw DimensionError("concat_cols: row count mismatch");
    ids.push_back(p.id());
    widths.push_back(p.cols());
    C += p.cols();
  }
  Tensor out(MatrixShape(R, C));
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, off + c) = pv(r, c);
    off += pv.cols();
  }
  return parts[0].graph().Record(
      std::move(out), ids, [ids, widths, R, C](Graph& g, std::size_t self) {
        auto d = g.grad(self);
        std::size_t off = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const std::size_t w = widths[i];
          if (g.needs_grad(ids[i])) {
            auto dp = g.grad(ids[i]);
            for (std::size_t r = 0; r < R; ++r)
              for (std::size_t c = 0; c < w; ++c)
                dp[r * w + c] += d[r * C + off + c];
          }
          off += w;
        }
      });
}

Var GatherRows(Var table, std::span<const int> indices) {
  const Tensor& tv = table.value();
  if (indices.empty()) throw DimensionError("gather_rows with no indices");
  const std::size_t N = tv.rows(), C = tv.cols();
  for (int i : indices)
    if (i < 0 || static_cast<std::size_t>(i) >= N)
      throw DimensionError("gather_rows index out of range");
  Tensor out(MatrixShape(indices.size(), C));
  for (std::size_t r = 0; r < indices.size(); ++r)
    for (std::size_t c = 0; c < C; ++c)
      out(r, c) = tv(static_cast<std::size_t>(indices[r]), c);
  const std::size_t it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return table.graph().Record(std::move(out), {it},
                              [it, C, idx](Graph& g, std::size_t self) {
                                auto d = g.grad(self);
                                auto dt = g.grad(it);
                                for (std::size_t r = 0; r < idx.size(); ++r)
                                  for (std::size_t c = 0; c < C; ++c)
                                    dt[static_cast<std::size_t>(idx[r]) * C +
                                       c] += d[r * C + c];
                              });
}

Var SelectPerRow(Var x, std::span<const int> cols) {
  const Tensor& xv = x.value();
  const std::size_t R = xv.rows(), C = xv.cols();
  if (cols.size() != R)
    throw DimensionError("select_per_row: need one column index per row");
  Tensor out(Shape{R});
  for (std::size_t r = 0; r < R; ++r) {
    if (cols[r] < 0 || static_cast<std::size_t>(cols[r]) >= C)
      throw DimensionError("select_per_row index out of range");
    out[r] = xv(r, static_cast<std::size_t>(cols[r]));
  }
  const std::size_t ix = x.id();
  std::vector<int> idx(cols.begin(), cols.end());
  return x.graph().Record(std::move(out), {ix},
                          [ix, C, idx](Graph& g, std::size_t self) {
                            auto d = g.grad(self);
                            auto dx = g.grad(ix);
                            for (std::size_t r = 0; r < idx.size(); ++r)
                              dx[r * C + static_cast<std::size_t>(idx[r])] +=
                                  d[r];
                          });
}

}  // namespace eeseq
