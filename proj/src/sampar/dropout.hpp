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

#include "sampar/random.hpp"
#include "sampar/tape.hpp"

namespace sampar {

enum class DropoutMode { deterministic, stochastic };

// Inverted dropout. In stochastic mode each unit is kept with probability
// 1 - p and scaled by 1/(1 - p), so E[output] = input. Deterministic mode is
// the identity.
struct DropoutLayer {
  double drop_probability = 0.1;
  DropoutMode mode = DropoutMode::stochastic;

  // Throws ConfigError unless 0 <= p < 1.
  void validate() const;
};

// The mask is drawn from `noise` and recorded as a constant, so gradients flow
// through kept units only.
Var dropout_forward(const DropoutLayer& layer, Var x, NoiseStream& noise);

}  // namespace sampar
