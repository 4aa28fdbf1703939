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

#include "eeseq/graph.h"

#include <cmath>

#include "eeseq/errors.h"

namespace eeseq {

Var Graph::Constant(Tensor value) {
  value.set_requires_grad(false);
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::Leaf(Tensor value) {
  value.set_requires_grad(true);
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::Param(Parameter& param) {
  auto it = param_nodes_.find(&param);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.value = param.value;
  n.param = &param;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::Record(Tensor value, std::vector<std::size_t> inputs,
                  BackwardFn fn) {
  if (backward_done_)
    throw StateError("graph already differentiated; call Reset() first");
  Node n;
  n.value = std::move(value);
  for (std::size_t in : inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
  n.value.set_requires_grad(n.needs_grad);
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Graph::Backward(Var loss) {
  if (backward_done_)
    throw StateError("backward() called twice without Reset()");
  if (&loss.graph() != this) throw StateError("loss belongs to another graph");
  const Tensor& lv = value(loss.id());
  if (lv.size() != 1)
    throw DimensionError("backward() needs a scalar loss, got " +
                         ShapeString(lv.shape()));
  if (!std::isfinite(lv[0])) throw NumericError("loss is not finite");
  backward_done_ = true;

  for (auto& n : nodes_)
    if (n.needs_grad) n.grad.assign(n.value.size(), 0.0);
  if (!nodes_[loss.id()].needs_grad) return;
  nodes_[loss.id()].grad[0] = 1.0;

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward) continue;
    n.backward(*this, i);
  }
  for (auto& n : nodes_) {
    if (!n.param) continue;
    auto g = n.param->grad.data();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
  }
}

void Graph::Reset() {
  nodes_.clear();
  param_nodes_.clear();
  backward_done_ = false;
}

}  // namespace eeseq
