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

#include "sampar/dropout.hpp"

#include "sampar/errors.hpp"
#include "sampar/ops.hpp"

namespace sampar {

void DropoutLayer::validate() const {
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    throw ConfigError("dropout probability must satisfy 0 <= p < 1, got " +
                      std::to_string(drop_probability));
  }
}

Var dropout_forward(const DropoutLayer& layer, Var x, NoiseStream& noise) {
  layer.validate();
  if (layer.mode == DropoutMode::deterministic) return x;
  Tensor mask(x.shape());
  noise.fill_keep_mask(mask.data(), layer.drop_probability);
  return mul(x, x.tape().constant(std::move(mask)));
}

}  // namespace sampar
