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

#ifndef EESEQ_GRAPH_H_
#define EESEQ_GRAPH_H_

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "eeseq/params.h"
#include "eeseq/tensor.h"

namespace eeseq {

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while the graph
// lives and has not been reset.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Gradient of the last backward() w.r.t. this node; empty before that.
  std::span<const double> grad() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Tape of executed operations. Nodes are appended in execution order, so
// inputs always precede their consumers and backward() is a single reverse
// sweep. One graph per forward pass; not thread-safe, but independent graphs
// share nothing mutable except the Parameters they write gradients into.
class Graph {
 public:
  // Reads the gradient of node `self` and accumulates into its inputs'.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var Constant(Tensor value);
  // Leaf whose gradient stays on the node (read with Var::grad()).
  Var Leaf(Tensor value);
  // Leaf bound to a Parameter; backward() adds into param.grad. Repeated
  // calls with the same parameter return the same node.
  Var Param(Parameter& param);

  // For op implementations.
  Var Record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Valid only inside backward().
  std::span<double> grad(std::size_t id) { return nodes_[id].grad; }
  std::span<const double> grad(std::size_t id) const {
    return nodes_[id].grad;
  }

  // Reverse sweep from a scalar loss. Errors: non-scalar or non-finite loss,
  // or a second call without Reset().
  void Backward(Var loss);
  void Reset();

  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return graph_->value(id_); }
inline std::span<const double> Var::grad() const {
  return static_cast<const Graph*>(graph_)->grad(id_);
}

}  // namespace eeseq

#endif  // EESEQ_GRAPH_H_
