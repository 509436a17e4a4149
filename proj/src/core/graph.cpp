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

#include "core/graph.hpp"

#include <algorithm>
#include <memory>
#include <utility>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace ginas::ad {

const Tensor& Var::value() const { return graph_->node(id_).value; }

bool Var::requires_grad() const { return graph_->node(id_).requires_grad; }

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, size() - 1);
}

Var Graph::variable(Tensor value) {
  Node n;
  n.op = "variable";
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, size() - 1);
}

Var Graph::parameter(const Parameter& p) {
  return p.trainable ? variable(p.value) : constant(p.value);
}

Var Graph::record(const char* op, Tensor value, std::vector<Var> inputs,
                  BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  bool any = false;
  if (grad_enabled_) {
    for (const Var& v : inputs) {
      Require(&v.graph() == this, ErrorCode::kInvalidArgument,
              std::string("op ") + op + " mixes nodes from different graphs");
      any = any || v.requires_grad();
    }
  }
  if (any) {
    n.requires_grad = true;
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, size() - 1);
}

bool GradResult::all_reached() const {
  return std::all_of(reached.begin(), reached.end(), [](bool r) { return r; });
}

GradResult grad(const Var& output, std::span<const Var> wrt,
                bool create_graph) {
  Require(output.valid(), ErrorCode::kInvalidArgument, "grad of invalid var");
  Require(output.numel() == 1, ErrorCode::kShapeMismatch,
          "grad requires a scalar output, got " +
              ShapeToString(output.shape()));
  Graph& g = output.graph();
  const int32_t out_id = output.id();

  // Mark nodes that depend on at least one wrt node.
  std::vector<char> depends(static_cast<size_t>(out_id) + 1, 0);
  int32_t first = out_id + 1;
  for (const Var& w : wrt) {
    Require(&w.graph() == &g, ErrorCode::kInvalidArgument,
            "grad wrt var from another graph");
    if (w.id() <= out_id) {
      depends[static_cast<size_t>(w.id())] = 1;
      first = std::min(first, w.id());
    }
  }
  for (int32_t id = first; id <= out_id; ++id) {
    const Node& n = g.node(id);
    if (depends[static_cast<size_t>(id)] || !n.requires_grad) continue;
    for (const Var& in : n.inputs) {
      if (in.id() >= first && depends[static_cast<size_t>(in.id())]) {
        depends[static_cast<size_t>(id)] = 1;
        break;
      }
    }
  }

  std::vector<Var> grads(static_cast<size_t>(out_id) + 1);
  GradModeGuard guard(g, create_graph);
  if (depends[static_cast<size_t>(out_id)]) {
    grads[static_cast<size_t>(out_id)] =
        g.constant(Tensor(output.shape(), 1.0));
  }
  for (int32_t id = out_id; id >= first; --id) {
    const Var gout = grads[static_cast<size_t>(id)];
    if (!gout.valid()) continue;
    // Copy out what we need; backward may append to the graph.
    const std::vector<Var> inputs = g.node(id).inputs;
    if (inputs.empty()) continue;
    const BackwardFn backward = g.node(id).backward;
    std::vector<bool> needs_vec(inputs.size());
    bool any = false;
    for (size_t k = 0; k < inputs.size(); ++k) {
      const int32_t in = inputs[k].id();
      needs_vec[k] = in >= first && depends[static_cast<size_t>(in)];
      any = any || needs_vec[k];
    }
    if (!any) continue;
    // std::vector<bool> has no contiguous storage; span needs real bools.
    std::unique_ptr<bool[]> needs(new bool[inputs.size()]);
    for (size_t k = 0; k < inputs.size(); ++k) needs[k] = needs_vec[k];
    BackwardArgs args{inputs, Var(&g, id), gout,
                      std::span<const bool>(needs.get(), inputs.size())};
    std::vector<Var> gin = backward(args);
    for (size_t k = 0; k < inputs.size(); ++k) {
      if (!needs[k] || k >= gin.size() || !gin[k].valid()) continue;
      Var& slot = grads[static_cast<size_t>(inputs[k].id())];
      slot = slot.valid() ? add(slot, gin[k]) : gin[k];
    }
  }

  GradResult result;
  for (const Var& w : wrt) {
    const bool reached = w.id() <= out_id &&
                         grads[static_cast<size_t>(w.id())].valid();
    result.reached.push_back(reached);
    result.grads.push_back(reached ? grads[static_cast<size_t>(w.id())]
                                   : g.constant(Tensor(w.shape(), 0.0)));
  }
  return result;
}

}  // namespace ginas::ad
