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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sampar/augment.hpp"
#include "sampar/data.hpp"
#include "sampar/launcher.hpp"
#include "sampar/losses.hpp"
#include "sampar/metrics.hpp"
#include "sampar/model.hpp"
#include "sampar/optimizer.hpp"
#include "sampar/process_group.hpp"

namespace sampar {

enum class Strategy { sequential, sample_parallel, data_parallel, hybrid };
enum class BatchMode { fixed_global, fixed_local };
enum class AugmentationMode { independent_per_worker, shared };

std::string to_string(Strategy strategy);
std::string to_string(BatchMode mode);
std::string to_string(AugmentationMode mode);
Strategy parse_strategy(const std::string& text);
BatchMode parse_batch_mode(const std::string& text);
AugmentationMode parse_augmentation_mode(const std::string& text);

#ifdef NDEBUG
inline constexpr bool kCheckConsistencyDefault = false;
#else
inline constexpr bool kCheckConsistencyDefault = true;
#endif

struct TrainConfig {
  Strategy strategy = Strategy::sequential;
  int world_size = 1;            // P
  std::size_t samples = 4;       // S, weight (or mask) samples per batch
  int sample_groups = 1;         // K, hybrid only
  int data_groups = 1;           // G, hybrid only
  std::size_t global_batch_size = 64;
  std::size_t local_batch_size = 32;  // per data shard, fixed_local only
  BatchMode batch_mode = BatchMode::fixed_global;
  std::size_t epochs = 1;
  std::size_t max_steps = 0;     // 0: no limit
  std::uint64_t base_seed = 42;
  ModelSpec model;
  // dataset_size 0 means "training set size".
  LossSpec loss = [] {
    LossSpec l;
    l.dataset_size = 0;
    return l;
  }();
  OptimizerConfig optimizer;
  AugmentationMode augmentation_mode = AugmentationMode::independent_per_worker;
  Augmentation augmentation;
  std::size_t eval_samples = 8;
  // Compare a parameter checksum across ranks after every step.
  bool check_consistency = kCheckConsistencyDefault;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Number of data shards each global batch is cut into (1, P or G).
std::size_t data_shard_count(const TrainConfig& cfg);
// Number of workers the S samples of one batch are split over (1, P or K).
std::size_t sample_split_count(const TrainConfig& cfg);
// Rows per optimizer step across all workers.
std::size_t effective_global_batch(const TrainConfig& cfg);

// What one rank does per batch.
struct WorkerPlan {
  int rank = 0;
  std::size_t sample_begin = 0;  // global sample indices [begin, end)
  std::size_t sample_end = 0;
  std::size_t sample_split = 1;  // workers sharing this rank's batch shard
  int group_first_rank = 0;      // first rank of that set
  Shard shard;
};

WorkerPlan plan_worker(const TrainConfig& cfg, int rank);

struct MetricsRecord {
  std::size_t epoch = 0;
  double cumulative_wall_seconds = 0.0;
  double train_loss = 0.0;
  double eval_metric = 0.0;  // accuracy (classification) or MSE (regression)
  double nll = 0.0;
  double mace = 0.0;
  std::string strategy;
  int world_size = 1;
  std::size_t samples = 0;
  std::size_t global_batch_size = 0;

  bool operator==(const MetricsRecord&) const = default;
};

struct StepInfo {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::size_t step = 0;
  int rank = 0;
  double loss = 0.0;  // averaged over ranks
};

// Observation points for tests and diagnostics. Called on the worker's thread.
struct TrainHooks {
  // Global weight-sample seeds consumed by this rank for the batch.
  std::function<void(const StepInfo&, std::span<const std::uint64_t>)> on_sample_seeds;
  // This rank's augmented input shard.
  std::function<void(const StepInfo&, const Tensor&)> on_batch;
  // Gradient after the allreduce, in BayesianModel::flat_gradients order.
  std::function<void(const StepInfo&, std::span<const double>)> on_gradients;
};

struct TrainResult {
  std::vector<MetricsRecord> records;
  std::vector<TimingSample> timings;
  std::vector<double> final_parameters;
  std::size_t steps = 0;
};

// The engine shared by every strategy. The model must be built from
// cfg.model; data widths must match it.
TrainResult train(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg, ProcessGroup& group,
                  const TrainHooks& hooks = {});

TrainResult train_sequential(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                             const TrainHooks& hooks = {});
TrainResult train_sample_parallel(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                                  ProcessGroup& group, const TrainHooks& hooks = {});
TrainResult train_data_parallel(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                                ProcessGroup& group, const TrainHooks& hooks = {});
TrainResult train_hybrid(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                         ProcessGroup& group, const TrainHooks& hooks = {});

// 64-bit hash of the exact parameter bits.
std::uint64_t parameter_checksum(const BayesianModel& model);

struct DistributedRun {
  LaunchResult launch;
  // Per rank; only filled for inline and thread-backed runs.
  std::vector<TrainResult> results;
  std::vector<std::uint64_t> checksums;
};

// Launches cfg.world_size workers, each building its replica from
// (cfg.model, cfg.base_seed) and training it. `on_finish` runs on every rank
// after training (inside the child process for socket runs).
using FinishFn = std::function<void(int rank, const BayesianModel&, const TrainResult&)>;
DistributedRun train_distributed(const TrainConfig& cfg, const SplitDataset& data, const LaunchOptions& launch,
                                 const TrainHooks& hooks = {}, const FinishFn& on_finish = {});

}  // namespace sampar
