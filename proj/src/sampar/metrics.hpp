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

#include <array>
#include <chrono>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sampar/process_group.hpp"
#include "sampar/tensor.hpp"

namespace sampar {

// ---------------------------------------------------------------------------
// Scaling

// t1 / tp: fixed total work on 1 vs p workers.
double speedup(double t1, double tp);
// t1(n) / tp(n * p): work per worker held constant.
double efficiency(double t1_at_n, double tp_at_np);

// ---------------------------------------------------------------------------
// Predictive quality

inline constexpr double kProbabilityFloor = 1e-12;

double accuracy(const Tensor& mean_probs, const std::vector<std::size_t>& labels);

// -(1/B) sum log(max(p[label], 1e-12)). Rows must sum to 1 within 1e-9.
double classification_nll(const Tensor& mean_probs, const std::vector<std::size_t>& labels);

// 0.05, 0.10, ..., 0.95.
std::vector<double> default_calibration_levels();

// Two-sided standard normal quantile of a central interval of mass q.
double central_interval_z(double q);

// Mean over levels q of |coverage(q) - q|, where coverage is the fraction of
// targets inside mean +- z(q) * std (boundary counts as inside).
double mace(const Tensor& mean, const Tensor& stddev, const Tensor& targets,
            const std::vector<double>& levels = default_calibration_levels());

// Classification form: predictions binned by confidence (max probability)
// into `bins` equal-width bins on [0, 1]; the mean over non-empty bins of
// |accuracy(bin) - mean confidence(bin)|.
double classification_mace(const Tensor& mean_probs, const std::vector<std::size_t>& labels, std::size_t bins = 10);

// ---------------------------------------------------------------------------
// Timing

enum class Phase { data_load, forward, backward, allreduce, optimizer, epoch_total };
inline constexpr std::size_t kPhaseCount = 6;

std::string to_string(Phase phase);
Phase parse_phase(const std::string& text);

struct TimingSample {
  std::size_t epoch = 0;
  Phase phase = Phase::epoch_total;
  double seconds = 0.0;

  bool operator==(const TimingSample&) const = default;
};

// Worker-local accumulation of wall-clock time per phase (monotonic clock).
class PhaseTimer {
 public:
  class Scope {
   public:
    Scope(PhaseTimer& timer, Phase phase)
        : timer_(timer), phase_(phase), start_(std::chrono::steady_clock::now()) {}
    ~Scope() { timer_.add(phase_, std::chrono::steady_clock::now() - start_); }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    PhaseTimer& timer_;
    Phase phase_;
    std::chrono::steady_clock::time_point start_;
  };

  Scope scope(Phase phase) { return Scope(*this, phase); }
  void add(Phase phase, std::chrono::steady_clock::duration elapsed);
  double seconds(Phase phase) const { return seconds_[static_cast<std::size_t>(phase)]; }
  void reset() { seconds_.fill(0.0); }

 private:
  std::array<double, kPhaseCount> seconds_{};
};

// barrier, start clock, run `epoch`, barrier, stop clock. Phase times and the
// total are max-reduced over the group so the slowest worker defines the
// epoch. Must be called by every rank.
std::vector<TimingSample> timed_epoch(std::size_t epoch, const std::function<void(PhaseTimer&)>& body,
                                      ProcessGroup& group);

}  // namespace sampar
