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
#include <cstdint>

#include "sampar/model.hpp"
#include "sampar/process_group.hpp"
#include "sampar/statistics.hpp"

namespace sampar {

// Stream identity of the passes of one prediction. Pass s uses
//   derive_seed(base_seed, evaluation, epoch, batch, s)
// no matter which worker evaluates it.
struct PredictiveSeeds {
  std::uint64_t base_seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t batch = 0;

  std::uint64_t for_sample(std::size_t s) const;
};

// What the passes are summarized as.
enum class PredictiveOutput {
  raw,            // the network outputs
  probabilities,  // row-wise softmax of the outputs
};

struct Predictive {
  Tensor mean;
  Tensor stddev;  // population std (divide by S)
};

// Moments of S stochastic passes on x.
SampleStatistics predictive_statistics(BayesianModel& model, const Tensor& x, std::size_t samples,
                                       const PredictiveSeeds& seeds,
                                       PredictiveOutput output = PredictiveOutput::raw);

// Same S passes split over the group: rank r evaluates the contiguous block
// [r*S/P, (r+1)*S/P) and the moments are merged with allgather_statistics.
// Requires S mod P == 0.
SampleStatistics predictive_statistics(BayesianModel& model, const Tensor& x, std::size_t samples,
                                       const PredictiveSeeds& seeds, ProcessGroup& group,
                                       PredictiveOutput output = PredictiveOutput::raw);

// Per-element mean and population standard deviation over S passes.
Predictive mc_predict(BayesianModel& model, const Tensor& x, std::size_t samples, const PredictiveSeeds& seeds);
Predictive mc_predict(BayesianModel& model, const Tensor& x, std::size_t samples, const PredictiveSeeds& seeds,
                      ProcessGroup& group);

Tensor softmax_rows(const Tensor& logits);

}  // namespace sampar
