// Copyright 2026 The ginas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GINAS_CORE_GRAPH_HPP_
#define GINAS_CORE_GRAPH_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace ginas::ad {

class Graph;

// Handle to one node of a Graph. Cheap to copy; valid only while the owning
// Graph is alive.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int32_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr && id_ >= 0; }
  Graph& graph() const { return *graph_; }
  int32_t id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  int64_t numel() const { return value().numel(); }
  bool requires_grad() const;

 private:
  Graph* graph_ = nullptr;
  int32_t id_ = -1;
};

// Persistent trainable or frozen tensor living outside any graph. Each
// optimization step registers it into a fresh Graph as a leaf.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

struct BackwardArgs {
  std::span<const Var> inputs;
  Var output;
  Var grad_output;
  std::span<const bool> needs;
};

// Vector-Jacobian product. Must be written in terms of graph ops so that the
// returned gradients are differentiable again when recorded with grad mode on.
// Returns one entry per input; entries for inputs with needs[i] == false may be
// left invalid.
using BackwardFn = std::function<std::vector<Var>(const BackwardArgs&)>;

struct Node {
  const char* op = "";
  Tensor value;
  std::vector<Var> inputs;
  bool requires_grad = false;
  BackwardFn backward;
};

// Append-only tape. Node ids are topologically ordered because a node can
// only reference nodes that already exist. Not thread-safe; distinct graphs
// are independent.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  Var parameter(const Parameter& p);

  // Records an op result. The backward function and inputs are kept only when
  // grad mode is on and at least one input requires grad.
  Var record(const char* op, Tensor value, std::vector<Var> inputs,
             BackwardFn backward);

  const Node& node(int32_t id) const { return nodes_[static_cast<size_t>(id)]; }
  int32_t size() const { return static_cast<int32_t>(nodes_.size()); }

  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool on) { grad_enabled_ = on; }

 private:
  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

// Scoped override of a graph's grad mode.
class GradModeGuard {
 public:
  GradModeGuard(Graph& graph, bool enabled)
      : graph_(graph), previous_(graph.grad_enabled()) {
    graph_.set_grad_enabled(enabled);
  }
  ~GradModeGuard() { graph_.set_grad_enabled(previous_); }
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  Graph& graph_;
  bool previous_;
};

struct GradResult {
  std::vector<Var> grads;
  // reached[i] is false when wrt[i] does not influence the output; the
  // corresponding gradient is then a zero constant.
  std::vector<bool> reached;

  bool all_reached() const;
};

// Reverse-mode gradient of a scalar output. With create_graph the returned
// gradients are themselves differentiable graph nodes.
GradResult grad(const Var& output, std::span<const Var> wrt, bool create_graph);

}  // namespace ginas::ad

#endif  // GINAS_CORE_GRAPH_HPP_
