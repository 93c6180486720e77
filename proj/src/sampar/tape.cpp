// Copyright (c) 2026 The sampar Authors. All Rights Reserved.
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

#include "sampar/tape.hpp"

#include <algorithm>
#include <cassert>

#include "sampar/errors.hpp"

namespace sampar {

const Tensor& Var::value() const { return tape_->value(id_); }

std::span<const double> Var::grad() const {
  return static_cast<const Tape*>(tape_)->grad(id_);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor& param) {
  if (auto it = parameter_ids_.find(&param); it != parameter_ids_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.external = &param;
  node.bound = &param;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  parameter_ids_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
#ifndef NDEBUG
  assert(value.all_finite() && "non-finite value recorded on tape");
#endif
  Node node;
  node.owned = std::move(value);
  node.requires_grad =
      fn && std::any_of(inputs.begin(), inputs.end(),
                        [this](std::size_t id) { return nodes_[id].requires_grad; });
  node.inputs = std::move(inputs);
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& node = nodes_[id];
  return node.external ? *node.external : node.owned;
}

void Tape::reset_grads() {
  for (Node& node : nodes_) {
    if (node.requires_grad) {
      node.grad.assign(node.external ? node.external->size() : node.owned.size(), 0.0);
    } else {
      node.grad.clear();
    }
  }
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw ContractError("backward root belongs to another tape");
  if (value(root.id()).size() != 1) {
    throw ContractError("backward root must be scalar, got shape " +
                        to_string(value(root.id()).shape()));
  }
  reset_grads();
  if (nodes_[root.id()].requires_grad) nodes_[root.id()].grad[0] = 1.0;
  propagate();
}

void Tape::backward(std::span<const Var> roots, std::span<const std::vector<double>> seeds) {
  if (roots.size() != seeds.size()) throw ContractError("one seed per backward root required");
  reset_grads();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const std::size_t id = roots[i].id();
    if (roots[i].tape_ != this) throw ContractError("backward root belongs to another tape");
    if (seeds[i].size() != value(id).size()) {
      throw DimensionError("seed length " + std::to_string(seeds[i].size()) +
                           " does not match node shape " + to_string(value(id).shape()));
    }
    if (!nodes_[id].requires_grad) continue;
    auto g = grad(id);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += seeds[i][k];
  }
  propagate();
}

void Tape::propagate() {
  for (std::size_t id = nodes_.size(); id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad) continue;
    if (node.backward) {
      node.backward(*this, id);
    } else if (node.bound) {
      auto dst = node.bound->grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    }
  }
}

}  // namespace sampar
