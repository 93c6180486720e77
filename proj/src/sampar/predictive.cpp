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

#include "sampar/predictive.hpp"

#include <algorithm>
#include <cmath>

#include "sampar/errors.hpp"

namespace sampar {

std::uint64_t PredictiveSeeds::for_sample(std::size_t s) const {
  return derive_seed(base_seed, StreamTag::evaluation, epoch, batch, s);
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw DimensionError("softmax_rows expects a matrix, got " + to_string(logits.shape()));
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double peak = logits.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) peak = std::max(peak, logits.at(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(logits.at(r, c) - peak);
    const double lse = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = std::exp(logits.at(r, c) - lse);
  }
  return out;
}

namespace {

SampleStatistics passes(BayesianModel& model, const Tensor& x, std::size_t begin, std::size_t end,
                        const PredictiveSeeds& seeds, PredictiveOutput output) {
  std::vector<Tensor> outputs;
  outputs.reserve(end - begin);
  for (std::size_t s = begin; s < end; ++s) {
    Tape tape;
    NoiseStream noise(seeds.for_sample(s));
    Tensor y = model.forward_sampled(tape, x, noise).value();
    outputs.push_back(output == PredictiveOutput::probabilities ? softmax_rows(y) : std::move(y));
  }
  return SampleStatistics::from_samples(outputs);
}

Predictive summarize(const SampleStatistics& stats) { return {stats.mean, stats.stddev()}; }

}  // namespace

SampleStatistics predictive_statistics(BayesianModel& model, const Tensor& x, std::size_t samples,
                                       const PredictiveSeeds& seeds, PredictiveOutput output) {
  if (samples == 0) throw ContractError("predictive needs S >= 1 samples");
  return passes(model, x, 0, samples, seeds, output);
}

SampleStatistics predictive_statistics(BayesianModel& model, const Tensor& x, std::size_t samples,
                                       const PredictiveSeeds& seeds, ProcessGroup& group,
                                       PredictiveOutput output) {
  if (samples == 0) throw ContractError("predictive needs S >= 1 samples");
  const auto p = static_cast<std::size_t>(group.world_size());
  if (samples % p != 0) {
    throw ConfigError("S mod P == 0 violated: S=" + std::to_string(samples) + ", P=" + std::to_string(p));
  }
  const std::size_t per = samples / p;
  const auto r = static_cast<std::size_t>(group.rank());
  return group.allgather_statistics(passes(model, x, r * per, (r + 1) * per, seeds, output));
}

Predictive mc_predict(BayesianModel& model, const Tensor& x, std::size_t samples, const PredictiveSeeds& seeds) {
  return summarize(predictive_statistics(model, x, samples, seeds));
}

Predictive mc_predict(BayesianModel& model, const Tensor& x, std::size_t samples, const PredictiveSeeds& seeds,
                      ProcessGroup& group) {
  return summarize(predictive_statistics(model, x, samples, seeds, group));
}

}  // namespace sampar
