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

#include <cstdint>

#include "sampar/random.hpp"
#include "sampar/tape.hpp"
#include "sampar/tensor.hpp"

namespace sampar {

// Mean-field Gaussian posterior of one weight tensor: sigma = softplus(rho).
struct VariationalParameter {
  Tensor mu;
  Tensor rho;

  const Shape& shape() const { return mu.shape(); }
  Tensor sigma() const;
};

// mu ~ N(0, 2/fan_in) (Kaiming); rho = softplus^-1(sigma_scale / fan_in).
VariationalParameter init_variational(const Shape& shape, std::size_t fan_in, std::uint64_t seed,
                                      double sigma_scale = 1.0);

// w = mu + softplus(rho) * eps with eps drawn from `noise`. Recorded on the
// tape so gradients reach both mu and rho.
Var sample_weights(Tape& tape, VariationalParameter& param, NoiseStream& noise);

// Closed-form KL to N(0, I) summed over the parameter's elements.
Var kl_to_standard_normal(Tape& tape, VariationalParameter& param);

}  // namespace sampar
