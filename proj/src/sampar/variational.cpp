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

#include "sampar/variational.hpp"

#include <cmath>
#include <random>

#include "sampar/errors.hpp"
#include "sampar/ops.hpp"

namespace sampar {

Tensor VariationalParameter::sigma() const {
  Tensor out(rho.shape());
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = softplus(rho[i]);
  return out;
}

VariationalParameter init_variational(const Shape& shape, std::size_t fan_in, std::uint64_t seed,
                                      double sigma_scale) {
  if (fan_in == 0) throw ContractError("init_variational: fan_in must be >= 1");
  if (!(sigma_scale > 0.0)) throw ContractError("init_variational: sigma scale must be positive");
  VariationalParameter p{Tensor(shape), Tensor(shape)};
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : p.mu.data()) v = normal(engine);
  const double rho0 = inverse_softplus(sigma_scale / static_cast<double>(fan_in));
  for (double& v : p.rho.data()) v = rho0;
  return p;
}

Var sample_weights(Tape& tape, VariationalParameter& param, NoiseStream& noise) {
  Tensor eps(param.shape());
  noise.fill_normal(eps.data());
  Var mu = tape.parameter(param.mu);
  Var sigma = softplus(tape.parameter(param.rho));
  return add(mu, mul(sigma, tape.constant(std::move(eps))));
}

Var kl_to_standard_normal(Tape& tape, VariationalParameter& param) {
  return kl_standard_normal(tape.parameter(param.mu), tape.parameter(param.rho));
}

}  // namespace sampar
