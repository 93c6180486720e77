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

#include "sampar/metrics.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "sampar/errors.hpp"

namespace sampar {

double speedup(double t1, double tp) {
  if (!(t1 > 0.0) || !(tp > 0.0)) throw ContractError("speedup needs positive times");
  return t1 / tp;
}

double efficiency(double t1_at_n, double tp_at_np) {
  if (!(t1_at_n > 0.0) || !(tp_at_np > 0.0)) throw ContractError("efficiency needs positive times");
  return t1_at_n / tp_at_np;
}

namespace {

void check_labels(const Tensor& probs, const std::vector<std::size_t>& labels) {
  if (probs.rank() != 2) throw DimensionError("expected [batch x classes] probabilities");
  if (labels.size() != probs.rows()) throw DimensionError("label count does not match batch size");
  if (labels.empty()) throw ContractError("empty batch");
  for (std::size_t l : labels) {
    if (l >= probs.cols()) throw DimensionError("label out of class range");
  }
}

std::size_t argmax_row(const Tensor& probs, std::size_t r) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.cols(); ++c) {
    if (probs.at(r, c) > probs.at(r, best)) best = c;
  }
  return best;
}

}  // namespace

double accuracy(const Tensor& mean_probs, const std::vector<std::size_t>& labels) {
  check_labels(mean_probs, labels);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) hits += argmax_row(mean_probs, r) == labels[r] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double classification_nll(const Tensor& mean_probs, const std::vector<std::size_t>& labels) {
  check_labels(mean_probs, labels);
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < mean_probs.cols(); ++c) row += mean_probs.at(r, c);
    if (std::abs(row - 1.0) > 1e-9) {
      throw ContractError("probability row " + std::to_string(r) + " sums to " + std::to_string(row));
    }
    total += std::log(std::max(mean_probs.at(r, labels[r]), kProbabilityFloor));
  }
  return -total / static_cast<double>(labels.size());
}

std::vector<double> default_calibration_levels() {
  std::vector<double> levels;
  for (int i = 1; i <= 19; ++i) levels.push_back(0.05 * i);
  return levels;
}

double central_interval_z(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ContractError("interval mass must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erf_inv(q);
}

double mace(const Tensor& mean, const Tensor& stddev, const Tensor& targets, const std::vector<double>& levels) {
  if (targets.size() == 0) throw ContractError("mace of zero targets");
  if (mean.shape() != targets.shape() || stddev.shape() != targets.shape()) {
    throw DimensionError("mace: mean, std and targets must share a shape");
  }
  if (levels.empty()) throw ContractError("mace needs at least one level");
  for (double s : stddev.data()) {
    if (s < 0.0) throw ContractError("negative predictive std");
  }
  double total = 0.0;
  for (double q : levels) {
    const double z = central_interval_z(q);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      inside += std::abs(targets[i] - mean[i]) <= z * stddev[i] ? 1 : 0;
    }
    total += std::abs(static_cast<double>(inside) / static_cast<double>(targets.size()) - q);
  }
  return total / static_cast<double>(levels.size());
}

double classification_mace(const Tensor& mean_probs, const std::vector<std::size_t>& labels, std::size_t bins) {
  check_labels(mean_probs, labels);
  if (bins < 1) throw ContractError("need at least one confidence bin");
  std::vector<double> confidence(bins, 0.0), correct(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const std::size_t top = argmax_row(mean_probs, r);
    const double conf = mean_probs.at(r, top);
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>(conf * static_cast<double>(bins)));
    confidence[b] += conf;
    correct[b] += top == labels[r] ? 1.0 : 0.0;
    ++count[b];
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    total += std::abs(correct[b] / n - confidence[b] / n);
    ++used;
  }
  return total / static_cast<double>(used);
}

// ---------------------------------------------------------------------------

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::data_load: return "data_load";
    case Phase::forward: return "forward";
    case Phase::backward: return "backward";
    case Phase::allreduce: return "allreduce";
    case Phase::optimizer: return "optimizer";
    case Phase::epoch_total: return "epoch_total";
  }
  return "?";
}

Phase parse_phase(const std::string& text) {
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    if (to_string(static_cast<Phase>(i)) == text) return static_cast<Phase>(i);
  }
  throw ParseError("unknown timing phase '" + text + "'");
}

void PhaseTimer::add(Phase phase, std::chrono::steady_clock::duration elapsed) {
  seconds_[static_cast<std::size_t>(phase)] += std::chrono::duration<double>(elapsed).count();
}

std::vector<TimingSample> timed_epoch(std::size_t epoch, const std::function<void(PhaseTimer&)>& body,
                                      ProcessGroup& group) {
  PhaseTimer timer;
  group.barrier();
  const auto start = std::chrono::steady_clock::now();
  body(timer);
  group.barrier();
  timer.add(Phase::epoch_total, std::chrono::steady_clock::now() - start);

  std::vector<double> local(kPhaseCount);
  for (std::size_t i = 0; i < kPhaseCount; ++i) local[i] = timer.seconds(static_cast<Phase>(i));
  const std::vector<double> slowest = group.allreduce_max(local);
  std::vector<TimingSample> out;
  for (std::size_t i = 0; i < kPhaseCount; ++i) out.push_back({epoch, static_cast<Phase>(i), slowest[i]});
  return out;
}

}  // namespace sampar
