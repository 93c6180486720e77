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
#include <optional>
#include <span>

#include "sampar/tape.hpp"

namespace sampar {

// Differentiable operations recorded on the tape of their operands. Binary
// elementwise ops require equal shapes; the only broadcast is add_bias.

Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var relu(Var x);
Var tanh(Var x);
Var exp(Var x);
// Throws DomainError naming the first non-positive index.
Var log(Var x);
// log(1 + e^x), computed without overflow. Backward is the logistic function.
Var softplus(Var x);
Var square(Var x);

Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
// max(x, floor); gradient is zero where the floor is active.
Var clamp_min(Var x, double floor);

// x[batch x n] + bias[n] broadcast over rows.
Var add_bias(Var x, Var bias);

// Row-wise log-softmax via max subtraction; classes >= 2.
Var log_softmax(Var logits);

// Full reduction to a scalar, or along `axis` of a rank-2 tensor.
Var sum(Var x, std::optional<std::size_t> axis = std::nullopt);
Var mean(Var x, std::optional<std::size_t> axis = std::nullopt);

// Elementwise sum of equally shaped operands, folded left to right.
Var add_n(std::span<const Var> terms);

// Fused closed-form KL( N(mu, softplus(rho)^2) || N(0, 1) ) summed over all
// elements: 0.5 * sum(sigma^2 + mu^2 - 1 - log sigma^2).
Var kl_standard_normal(Var mu, Var rho);

// Scalar helpers shared with code that works outside the tape.
double softplus(double x);
double inverse_softplus(double y);
double logistic(double x);

}  // namespace sampar
