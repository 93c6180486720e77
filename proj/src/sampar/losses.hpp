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
#include <string>
#include <vector>

#include "sampar/statistics.hpp"
#include "sampar/tape.hpp"

namespace sampar {

enum class LossKind {
  // Mean squared error of the predictive mean over samples.
  mse_of_mean,
  // Cross-entropy of the arithmetic mean of per-sample class probabilities.
  cross_entropy_of_mean_prob,
  // Gaussian NLL with the sample mean and (population) sample variance.
  gaussian_nll,
  // (1/S) sum_s loss(y_s); linear in the samples.
  mean_of_per_sample_loss,
};

enum class Aggregation {
  // Each worker differentiates the loss of its own samples; gradients are averaged.
  approximate,
  // Workers exchange the sample statistics the loss depends on and
  // differentiate the global loss; reproduces the sequential gradient.
  exact,
};

// Per-sample term used by mean_of_per_sample_loss.
enum class PerSampleLoss { mse, cross_entropy };

std::string to_string(LossKind kind);
std::string to_string(Aggregation aggregation);
std::string to_string(PerSampleLoss loss);
LossKind parse_loss_kind(const std::string& text);
Aggregation parse_aggregation(const std::string& text);
PerSampleLoss parse_per_sample_loss(const std::string& text);

struct LossSpec {
  LossKind kind = LossKind::mse_of_mean;
  Aggregation aggregation = Aggregation::approximate;
  std::size_t dataset_size = 1;  // |D|, divides the KL term
  PerSampleLoss per_sample = PerSampleLoss::mse;
  double variance_floor = 1e-6;
  double kl_weight = 1.0;

  void validate() const;
  // Data term depends nonlinearly on sample statistics (exact mode applies).
  bool nonlinear_in_samples() const { return kind != LossKind::mean_of_per_sample_loss; }
  // Predictions are logits over classes; targets are one-hot rows.
  bool classification() const;
  bool operator==(const LossSpec&) const = default;
};

// Whether the predictions handed to the loss are every sample of the batch
// (complete) or one worker's share of them (partial, approximate mode).
enum class SampleScope { complete, partial };

// Data-fitting term for the given samples. Predictions are [batch x out]
// (logits for classification kinds); targets have the same shape.
Var data_loss(Tape& tape, std::span<const Var> predictions, const Tensor& targets, const LossSpec& spec,
              SampleScope scope = SampleScope::complete);

// Negative scaled ELBO: data term + kl_weight * kl / dataset_size.
Var elbo_loss(Tape& tape, std::span<const Var> predictions, const Tensor& targets, Var kl,
              const LossSpec& spec, SampleScope scope = SampleScope::complete);

// Mean over elements of 0.5 * [ln(2 pi v) + (target - mean)^2 / v] with
// v = max(variance, variance_floor). Requires stats.count >= 2.
double gaussian_nll(const SampleStatistics& stats, const Tensor& targets, double variance_floor);

// Quantity whose moments the data term needs: the raw outputs, or the
// softmax probabilities for cross_entropy_of_mean_prob.
Tensor loss_statistic_input(const Tensor& prediction, const LossSpec& spec);
SampleStatistics local_loss_statistics(std::span<const Tensor> predictions, const LossSpec& spec);

// Data term evaluated from (global) sample statistics.
double data_loss_from_statistics(const SampleStatistics& stats, const Tensor& targets, const LossSpec& spec);

// dL_data/d(prediction_s) for each local sample, using GLOBAL statistics.
// Throws ContractError if global.count != expected_count (statistics were not
// reduced over every worker).
std::vector<std::vector<double>> exact_loss_gradient(std::span<const Tensor> local_predictions,
                                                     const Tensor& targets, const SampleStatistics& global,
                                                     const LossSpec& spec, std::size_t expected_count);

}  // namespace sampar
