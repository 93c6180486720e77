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

#include "sampar/random.hpp"

#include <algorithm>

namespace sampar {

std::uint64_t mix64(std::uint64_t x) {
  x += kSeedGolden;
  x = (x ^ (x >> 30)) * kSeedMixA;
  x = (x ^ (x >> 27)) * kSeedMixB;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, StreamTag tag, std::uint64_t epoch,
                          std::uint64_t batch, std::uint64_t index) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  h = mix64(h ^ epoch);
  h = mix64(h ^ batch);
  return mix64(h ^ index);
}

NoiseStream NoiseStream::zero() { return NoiseStream(); }

void NoiseStream::fill_normal(std::span<double> out) {
  if (zero_) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(engine_);
}

void NoiseStream::fill_keep_mask(std::span<double> out, double drop_probability) {
  const double keep_scale = 1.0 / (1.0 - drop_probability);
  if (zero_ || drop_probability == 0.0) {
    std::fill(out.begin(), out.end(), zero_ ? 1.0 : keep_scale);
    return;
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (double& v : out) v = uniform(engine_) < drop_probability ? 0.0 : keep_scale;
}

}  // namespace sampar
