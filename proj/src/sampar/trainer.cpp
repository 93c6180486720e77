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

#include "sampar/trainer.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <sstream>

#include "sampar/errors.hpp"
#include "sampar/ops.hpp"
#include "sampar/predictive.hpp"

namespace sampar {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::sequential: return "sequential";
    case Strategy::sample_parallel: return "sample_parallel";
    case Strategy::data_parallel: return "data_parallel";
    case Strategy::hybrid: return "hybrid";
  }
  return "?";
}

std::string to_string(BatchMode mode) { return mode == BatchMode::fixed_global ? "fixed_global" : "fixed_local"; }

std::string to_string(AugmentationMode mode) {
  return mode == AugmentationMode::shared ? "shared" : "independent_per_worker";
}

Strategy parse_strategy(const std::string& text) {
  for (Strategy s : {Strategy::sequential, Strategy::sample_parallel, Strategy::data_parallel, Strategy::hybrid}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown strategy '" + text + "'");
}

BatchMode parse_batch_mode(const std::string& text) {
  if (text == "fixed_global") return BatchMode::fixed_global;
  if (text == "fixed_local") return BatchMode::fixed_local;
  throw ConfigError("unknown batch mode '" + text + "' (expected fixed_global|fixed_local)");
}

AugmentationMode parse_augmentation_mode(const std::string& text) {
  if (text == "shared") return AugmentationMode::shared;
  if (text == "independent_per_worker") return AugmentationMode::independent_per_worker;
  throw ConfigError("unknown augmentation mode '" + text + "' (expected independent_per_worker|shared)");
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& invariant, const std::string& detail) {
  throw ConfigError("config violates " + invariant + " (" + detail + ")");
}

std::string kv(const char* name, std::size_t value) { return std::string(name) + "=" + std::to_string(value); }

}  // namespace

void TrainConfig::validate() const {
  if (world_size < 1) invalid("P >= 1", kv("P", 0));
  if (samples < 1) invalid("S >= 1", kv("S", samples));
  if (epochs < 1) invalid("epochs >= 1", kv("epochs", epochs));
  const auto p = static_cast<std::size_t>(world_size);

  switch (strategy) {
    case Strategy::sequential:
      if (p != 1) invalid("P == 1 for the sequential strategy", kv("P", p));
      break;
    case Strategy::sample_parallel:
      if (samples % p != 0) invalid("S mod P == 0", kv("S", samples) + ", " + kv("P", p));
      break;
    case Strategy::data_parallel:
      if (batch_mode == BatchMode::fixed_global && global_batch_size % p != 0) {
        invalid("global_batch_size mod P == 0", kv("global_batch_size", global_batch_size) + ", " + kv("P", p));
      }
      break;
    case Strategy::hybrid: {
      if (sample_groups < 1 || data_groups < 1 ||
          static_cast<std::size_t>(sample_groups) * static_cast<std::size_t>(data_groups) != p) {
        invalid("K*G == P", "K=" + std::to_string(sample_groups) + ", G=" + std::to_string(data_groups) + ", " +
                                kv("P", p));
      }
      const auto k = static_cast<std::size_t>(sample_groups);
      const auto g = static_cast<std::size_t>(data_groups);
      if (samples % k != 0) invalid("S mod K == 0", kv("S", samples) + ", " + kv("K", k));
      if (batch_mode == BatchMode::fixed_global && global_batch_size % g != 0) {
        invalid("global_batch_size mod G == 0", kv("global_batch_size", global_batch_size) + ", " + kv("G", g));
      }
      break;
    }
  }
  if (batch_mode == BatchMode::fixed_global && global_batch_size < 1) invalid("global_batch_size >= 1", "0");
  if (batch_mode == BatchMode::fixed_local && local_batch_size < 1) invalid("local_batch_size >= 1", "0");

  model.validate();
  LossSpec resolved = loss;
  if (resolved.dataset_size == 0) resolved.dataset_size = 1;
  resolved.validate();
  if (loss.aggregation == Aggregation::exact && !loss.nonlinear_in_samples()) {
    invalid("exact aggregation needs a loss that is nonlinear in the samples", "loss.kind=" + to_string(loss.kind));
  }
  if (loss.kind == LossKind::gaussian_nll && sample_split_count(*this) == 1 && samples < 2) {
    invalid("S >= 2 for gaussian_nll", kv("S", samples));
  }
  const bool classification = loss.classification();
  if (classification && model.output_dim < 2) invalid("classes >= 2 for classification losses", "output_dim < 2");
  optimizer.validate();
  if (eval_samples < 1 || (!classification && eval_samples < 2)) {
    invalid("eval_samples >= 2", kv("eval_samples", eval_samples));
  }
  augmentation.validate(model.input_dim);
}

std::size_t data_shard_count(const TrainConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::data_parallel: return static_cast<std::size_t>(cfg.world_size);
    case Strategy::hybrid: return static_cast<std::size_t>(cfg.data_groups);
    default: return 1;
  }
}

std::size_t sample_split_count(const TrainConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::sample_parallel: return static_cast<std::size_t>(cfg.world_size);
    case Strategy::hybrid: return static_cast<std::size_t>(cfg.sample_groups);
    default: return 1;
  }
}

std::size_t effective_global_batch(const TrainConfig& cfg) {
  return cfg.batch_mode == BatchMode::fixed_global ? cfg.global_batch_size
                                                   : cfg.local_batch_size * data_shard_count(cfg);
}

WorkerPlan plan_worker(const TrainConfig& cfg, int rank) {
  if (rank < 0 || rank >= cfg.world_size) throw ContractError("rank out of range");
  const std::size_t k = sample_split_count(cfg);
  const auto r = static_cast<std::size_t>(rank);
  // Ranks are laid out data-group major: rank = g * K + k.
  const std::size_t group = r / k;
  const std::size_t within = r % k;
  const std::size_t per = cfg.samples / k;
  WorkerPlan plan;
  plan.rank = rank;
  plan.sample_begin = within * per;
  plan.sample_end = (within + 1) * per;
  plan.sample_split = k;
  plan.group_first_rank = static_cast<int>(group * k);
  plan.shard = Shard{group, data_shard_count(cfg)};
  return plan;
}

std::uint64_t parameter_checksum(const BayesianModel& model) {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : model.flat_parameters()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

struct StepOutcome {
  std::vector<double> grads;  // local, flat
  double loss = 0.0;
  double data_term = 0.0;
  double kl = 0.0;
};

// Statistics of this rank's data group, merged in rank order.
SampleStatistics group_statistics(const SampleStatistics& local, const WorkerPlan& plan, ProcessGroup& group) {
  if (plan.sample_split == 1) return local;
  const auto all = group.allgather(local.pack());
  SampleStatistics merged;
  merged.count = 0;
  for (std::size_t i = 0; i < plan.sample_split; ++i) {
    const auto r = static_cast<std::size_t>(plan.group_first_rank) + i;
    merged = merge_statistics(merged, SampleStatistics::unpack(all[r], local.mean.shape()));
  }
  return merged;
}

class Worker {
 public:
  Worker(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg, ProcessGroup& group,
         const TrainHooks& hooks)
      : model_(model),
        data_(data),
        cfg_(cfg),
        group_(group),
        hooks_(hooks),
        plan_(plan_worker(cfg, group.rank())),
        optimizer_(cfg.optimizer, model.trainable_count()) {
    loss_ = cfg.loss;
    if (loss_.dataset_size == 0) loss_.dataset_size = data.train.size();
  }

  TrainResult run() {
    TrainResult result;
    synchronize_initial_parameters();
    const std::size_t batch = effective_global_batch(cfg_);
    if (data_.train.size() < batch) {
      throw ConfigError("training set has " + std::to_string(data_.train.size()) +
                        " rows, fewer than one global batch of " + std::to_string(batch));
    }
    double wall = 0.0;
    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      if (cfg_.max_steps != 0 && steps_ >= cfg_.max_steps) break;
      double loss_sum = 0.0;
      std::size_t loss_count = 0;
      auto timings = timed_epoch(
          epoch,
          [&](PhaseTimer& timer) {
            std::vector<Batch> stream;
            {
              auto t = timer.scope(Phase::data_load);
              stream = batches(data_.train, batch, epoch, cfg_.base_seed, plan_.shard);
            }
            for (const Batch& b : stream) {
              if (cfg_.max_steps != 0 && steps_ >= cfg_.max_steps) break;
              loss_sum += step(epoch, b, timer);
              ++loss_count;
            }
          },
          group_);
      for (const TimingSample& t : timings) {
        if (t.phase == Phase::epoch_total) wall += t.seconds;
      }
      result.timings.insert(result.timings.end(), timings.begin(), timings.end());

      MetricsRecord record = evaluate(epoch);
      record.cumulative_wall_seconds = wall;
      record.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
      result.records.push_back(record);
    }
    result.final_parameters = model_.flat_parameters();
    result.steps = steps_;
    return result;
  }

 private:
  void synchronize_initial_parameters() {
    const auto params = model_.flat_parameters();
    const auto root = group_.broadcast(params, 0);
    model_.set_flat_parameters(root);
  }

  double step(std::size_t epoch, const Batch& batch, PhaseTimer& timer) {
    StepInfo info{epoch, batch.index, steps_, group_.rank(), 0.0};
    Tensor x;
    {
      auto t = timer.scope(Phase::data_load);
      const std::uint64_t key = cfg_.augmentation_mode == AugmentationMode::shared
                                    ? 0
                                    : static_cast<std::uint64_t>(group_.rank());
      x = augment(batch.inputs, cfg_.augmentation,
                  derive_seed(cfg_.base_seed, StreamTag::augmentation, epoch, batch.index, key), batch.row_offset);
    }
    if (hooks_.on_batch) hooks_.on_batch(info, x);

    std::vector<std::uint64_t> seeds;
    for (std::size_t s = plan_.sample_begin; s < plan_.sample_end; ++s) {
      seeds.push_back(derive_seed(cfg_.base_seed, StreamTag::weight_sample, epoch, batch.index, s));
    }
    if (hooks_.on_sample_seeds) hooks_.on_sample_seeds(info, seeds);

    StepOutcome local;
    try {
      local = cfg_.loss.aggregation == Aggregation::exact ? exact_step(x, batch.targets, seeds, timer)
                                                           : approximate_step(x, batch.targets, seeds, timer);
    } catch (const DomainError& e) {
      throw NumericError("numeric failure at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(batch.index) + ": " + e.what());
    }

    std::vector<double> averaged;
    {
      auto t = timer.scope(Phase::allreduce);
      local.grads.push_back(local.loss);
      averaged = group_.allreduce_average(local.grads);
    }
    info.loss = averaged.back();
    averaged.pop_back();

    bool finite = std::isfinite(info.loss);
    for (double g : averaged) finite = finite && std::isfinite(g);
    if (!finite) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << ", batch " << batch.index << ": loss=" << info.loss
          << " (rank " << group_.rank() << " data term=" << local.data_term << ", kl=" << local.kl
          << ", kl weight/|D|=" << loss_.kl_weight / static_cast<double>(loss_.dataset_size) << ")";
      throw NumericError(msg.str());
    }
    if (hooks_.on_gradients) hooks_.on_gradients(info, averaged);

    {
      auto t = timer.scope(Phase::optimizer);
      auto params = model_.flat_parameters();
      optimizer_.step(params, averaged);
      model_.set_flat_parameters(params);
    }
    if (cfg_.check_consistency) {
      auto t = timer.scope(Phase::allreduce);
      check_consistency();
    }
    ++steps_;
    return info.loss;
  }

  // Each worker differentiates the ELBO of its own samples.
  StepOutcome approximate_step(const Tensor& x, const Tensor& y, std::span<const std::uint64_t> seeds,
                               PhaseTimer& timer) {
    model_.zero_grad();
    Tape tape;
    Var total;
    StepOutcome out;
    {
      auto t = timer.scope(Phase::forward);
      std::vector<Var> preds;
      for (std::uint64_t seed : seeds) {
        NoiseStream noise(seed);
        preds.push_back(model_.forward_sampled(tape, x, noise));
      }
      const SampleScope scope = plan_.sample_split > 1 ? SampleScope::partial : SampleScope::complete;
      Var data = data_loss(tape, preds, y, loss_, scope);
      Var kl = model_.kl(tape);
      total = add(data, scale(kl, loss_.kl_weight / static_cast<double>(loss_.dataset_size)));
      out.data_term = data.value()[0];
      out.kl = kl.value()[0];
      out.loss = total.value()[0];
    }
    {
      auto t = timer.scope(Phase::backward);
      tape.backward(total);
      out.grads = model_.flat_gradients();
    }
    return out;
  }

  // Workers exchange the sample statistics of their data group and seed the
  // backward pass with the gradient of the group-level loss.
  StepOutcome exact_step(const Tensor& x, const Tensor& y, std::span<const std::uint64_t> seeds, PhaseTimer& timer) {
    model_.zero_grad();
    Tape tape;
    std::vector<Var> preds;
    std::vector<Tensor> values;
    Var kl;
    SampleStatistics local;
    {
      auto t = timer.scope(Phase::forward);
      for (std::uint64_t seed : seeds) {
        NoiseStream noise(seed);
        preds.push_back(model_.forward_sampled(tape, x, noise));
        values.push_back(preds.back().value());
      }
      kl = model_.kl(tape);
      local = local_loss_statistics(values, loss_);
    }
    SampleStatistics global;
    {
      auto t = timer.scope(Phase::allreduce);
      global = group_statistics(local, plan_, group_);
    }
    StepOutcome out;
    {
      auto t = timer.scope(Phase::backward);
      auto grad_seeds = exact_loss_gradient(values, y, global, loss_, cfg_.samples);
      // The gradient allreduce averages over the K workers that split the
      // samples; each of them holds 1/K of the sum, so scale back up.
      const double k = static_cast<double>(plan_.sample_split);
      for (auto& g : grad_seeds) {
        for (double& v : g) v *= k;
      }
      const double kl_scale = loss_.kl_weight / static_cast<double>(loss_.dataset_size);
      std::vector<Var> roots = preds;
      roots.push_back(kl);
      grad_seeds.push_back({kl_scale});
      tape.backward(roots, grad_seeds);
      out.grads = model_.flat_gradients();
      out.data_term = data_loss_from_statistics(global, y, loss_);
      out.kl = kl.value()[0];
      out.loss = out.data_term + kl_scale * out.kl;
    }
    return out;
  }

  void check_consistency() {
    const std::uint64_t h = parameter_checksum(model_);
    const std::vector<double> mine{static_cast<double>(h >> 32), static_cast<double>(h & 0xffffffffULL)};
    const auto all = group_.allgather(mine);
    for (std::size_t r = 1; r < all.size(); ++r) {
      if (all[r] != all[0]) {
        throw DesyncError("parameter checksum divergence after step " + std::to_string(steps_) + ": rank " +
                          std::to_string(r) + " differs from rank 0");
      }
    }
  }

  MetricsRecord evaluate(std::size_t epoch) {
    MetricsRecord record;
    record.epoch = epoch;
    record.strategy = to_string(cfg_.strategy);
    record.world_size = cfg_.world_size;
    record.samples = cfg_.samples;
    record.global_batch_size = effective_global_batch(cfg_);

    const Dataset& val = data_.validation;
    const bool classification = loss_.classification();
    const PredictiveSeeds seeds{cfg_.base_seed, epoch, 0};
    const auto output = classification ? PredictiveOutput::probabilities : PredictiveOutput::raw;
    const bool split = cfg_.eval_samples % static_cast<std::size_t>(group_.world_size()) == 0;
    const SampleStatistics stats =
        split ? predictive_statistics(model_, val.inputs, cfg_.eval_samples, seeds, group_, output)
              : predictive_statistics(model_, val.inputs, cfg_.eval_samples, seeds, output);

    if (classification) {
      const auto labels = labels_from_one_hot(val.targets);
      record.eval_metric = accuracy(stats.mean, labels);
      record.nll = classification_nll(stats.mean, labels);
      record.mace = classification_mace(stats.mean, labels);
    } else {
      double se = 0.0;
      for (std::size_t i = 0; i < val.targets.size(); ++i) {
        const double r = stats.mean[i] - val.targets[i];
        se += r * r;
      }
      record.eval_metric = se / static_cast<double>(val.targets.size());
      record.nll = gaussian_nll(stats, val.targets, loss_.variance_floor);
      record.mace = mace(stats.mean, stats.stddev(), val.targets);
    }
    return record;
  }

  BayesianModel& model_;
  const SplitDataset& data_;
  const TrainConfig& cfg_;
  ProcessGroup& group_;
  const TrainHooks& hooks_;
  WorkerPlan plan_;
  LossSpec loss_;
  Optimizer optimizer_;
  std::size_t steps_ = 0;
};

void require_strategy(const TrainConfig& cfg, Strategy expected) {
  if (cfg.strategy != expected) {
    throw ContractError("config strategy is " + to_string(cfg.strategy) + ", expected " + to_string(expected));
  }
}

}  // namespace

TrainResult train(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg, ProcessGroup& group,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (group.world_size() != cfg.world_size) {
    throw ConfigError("process group has " + std::to_string(group.world_size()) + " ranks, config P=" +
                      std::to_string(cfg.world_size));
  }
  if (model.input_dim() != data.train.inputs.cols() || model.output_dim() != data.train.targets.cols()) {
    throw ConfigError("model widths " + std::to_string(model.input_dim()) + "->" +
                      std::to_string(model.output_dim()) + " do not match the data " +
                      std::to_string(data.train.inputs.cols()) + "->" + std::to_string(data.train.targets.cols()));
  }
  Worker worker(model, data, cfg, group, hooks);
  return worker.run();
}

TrainResult train_sequential(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                             const TrainHooks& hooks) {
  require_strategy(cfg, Strategy::sequential);
  ProcessGroup single = ProcessGroup::single();
  return train(model, data, cfg, single, hooks);
}

TrainResult train_sample_parallel(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                                  ProcessGroup& group, const TrainHooks& hooks) {
  require_strategy(cfg, Strategy::sample_parallel);
  return train(model, data, cfg, group, hooks);
}

TrainResult train_data_parallel(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                                ProcessGroup& group, const TrainHooks& hooks) {
  require_strategy(cfg, Strategy::data_parallel);
  return train(model, data, cfg, group, hooks);
}

TrainResult train_hybrid(BayesianModel& model, const SplitDataset& data, const TrainConfig& cfg,
                         ProcessGroup& group, const TrainHooks& hooks) {
  require_strategy(cfg, Strategy::hybrid);
  return train(model, data, cfg, group, hooks);
}

DistributedRun train_distributed(const TrainConfig& cfg, const SplitDataset& data, const LaunchOptions& launch,
                                 const TrainHooks& hooks, const FinishFn& on_finish) {
  cfg.validate();
  LaunchOptions options = launch;
  options.world_size = cfg.world_size;
  DistributedRun run;
  run.results.resize(static_cast<std::size_t>(cfg.world_size));
  run.checksums.resize(static_cast<std::size_t>(cfg.world_size), 0);
  run.launch = launch_workers(options, [&](ProcessGroup& group) {
    BayesianModel model(cfg.model, cfg.base_seed);
    TrainResult result = train(model, data, cfg, group, hooks);
    const auto r = static_cast<std::size_t>(group.rank());
    run.checksums[r] = parameter_checksum(model);
    if (on_finish) on_finish(group.rank(), model, result);
    run.results[r] = std::move(result);
  });
  return run;
}

}  // namespace sampar
