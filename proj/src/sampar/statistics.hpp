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
#include <span>
#include <vector>

#include "sampar/tensor.hpp"

namespace sampar {

// Mean and population variance of a set of equally shaped samples. Merging
// uses the pairwise update of Chan et al., so the pooled variance of several
// workers' sample sets is recovered exactly rather than by averaging
// deviations. Identical samples give a variance of exactly 0.
struct SampleStatistics {
  Tensor mean;
  Tensor central;  // elementwise E[(x - mean)^2]
  std::size_t count = 0;

  static SampleStatistics from_samples(std::span<const Tensor> samples);

  Tensor variance() const { return central; }
  // Elementwise E[x^2] = variance + mean^2.
  Tensor second_moment() const;
  // Population standard deviation (divide by count).
  Tensor stddev() const;

  // [count, mean..., central...]; shape is supplied on unpack.
  std::vector<double> pack() const;
  static SampleStatistics unpack(std::span<const double> packed, const Shape& shape);
};

// Count-weighted merge. Merging with an empty (count 0) statistic is the identity.
SampleStatistics merge_statistics(const SampleStatistics& a, const SampleStatistics& b);

}  // namespace sampar
