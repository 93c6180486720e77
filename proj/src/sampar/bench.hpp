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

#include <filesystem>
#include <string>
#include <vector>

#include "sampar/config.hpp"

namespace sampar {

struct BenchRow {
  std::string strategy;
  std::string batch_mode;
  int world_size = 1;
  std::size_t samples = 0;
  std::size_t global_batch_size = 0;
  int sample_groups = 1;
  int data_groups = 1;
  double epoch_seconds = 0.0;  // median over repeats of the mean epoch time
  double ratio = 0.0;          // speedup or efficiency against the P=1 point
  std::string status;          // "ok" or the reason the point failed
};

// Hybrid grid used by the sweeps: K = 2 sample ranks per data group when P is
// even, otherwise a single group (G = 1, K = P).
void hybrid_grid(int world_size, int& sample_groups, int& data_groups);

// Mean epoch time of one run, max-reduced over workers. `scratch` receives a
// temporary file when workers are separate processes.
double measure_epoch_seconds(const ExperimentConfig& cfg, const SplitDataset& data,
                             const std::filesystem::path& scratch);

// Fixed-sample scaling: S = bench.samples for every P in bench.workers, for
// the sample_parallel, data_parallel and hybrid strategies under both batch
// modes. ratio = speedup against the same strategy/mode at P=1.
std::vector<BenchRow> bench_fixed(const ExperimentConfig& cfg, const SplitDataset& data,
                                  const std::filesystem::path& scratch);

// Proportional-sample scaling: sample_parallel with S = s_per_worker * P.
// ratio = efficiency against P=1.
std::vector<BenchRow> bench_proportional(const ExperimentConfig& cfg, const SplitDataset& data,
                                         const std::filesystem::path& scratch);

// ratio_name is "speedup" or "efficiency".
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows,
                     const std::string& ratio_name);

}  // namespace sampar
