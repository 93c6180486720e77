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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sampar/tensor.hpp"

namespace sampar {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  // Gradient of the last backward pass w.r.t. this node (empty if it does
  // not depend on any parameter).
  std::span<const double> grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recording of one forward computation.
//
// Nodes are appended in evaluation order, so the node list is always in
// topological order and backward is a single reverse sweep. Parameter leaves
// reference caller-owned tensors; backward() adds their gradients into
// Tensor::grad(), so gradients accumulate across calls until zeroed.
//
// A tape is owned by one worker and is not thread-safe.
class Tape {
 public:
  // Accumulates the node's output gradient into its inputs' gradients.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to `param`. Registering the same tensor twice returns the same
  // node. `param` must outlive the tape.
  Var parameter(Tensor& param);

  // Appends an interior node; `fn` may be empty when no input needs a gradient.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node during the backward sweep.
  std::span<double> grad(std::size_t id) { return nodes_[id].grad; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  std::span<const std::size_t> inputs(std::size_t id) const { return nodes_[id].inputs; }

  Var var(std::size_t id) { return Var(this, id); }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and propagates. Root must hold one element.
  void backward(Var root);
  // Seeds several nodes with explicit upstream gradients and propagates once.
  void backward(std::span<const Var> roots, std::span<const std::vector<double>> seeds);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* bound = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  void reset_grads();
  void propagate();

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> parameter_ids_;
};

}  // namespace sampar
