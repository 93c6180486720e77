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

#include "sampar/bench.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sampar/errors.hpp"
#include "sampar/experiment.hpp"
#include "sampar/results.hpp"

namespace sampar {

void hybrid_grid(int world_size, int& sample_groups, int& data_groups) {
  if (world_size % 2 == 0) {
    sample_groups = 2;
    data_groups = world_size / 2;
  } else {
    sample_groups = world_size;
    data_groups = 1;
  }
}

namespace {

double mean_epoch_total(const std::vector<TimingSample>& timings) {
  double total = 0.0;
  std::size_t n = 0;
  for (const TimingSample& t : timings) {
    if (t.phase != Phase::epoch_total) continue;
    total += t.seconds;
    ++n;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BenchRow run_point(const ExperimentConfig& base, const SplitDataset& data, Strategy strategy, BatchMode mode, int p,
                   std::size_t samples, const std::filesystem::path& scratch) {
  ExperimentConfig cfg = base;
  TrainConfig& t = cfg.train;
  t.strategy = strategy;
  t.batch_mode = mode;
  t.world_size = p;
  t.samples = samples;
  t.epochs = base.bench.epochs;
  t.max_steps = base.bench.max_steps;
  t.check_consistency = false;
  if (strategy == Strategy::hybrid) {
    hybrid_grid(p, t.sample_groups, t.data_groups);
  } else {
    t.sample_groups = 1;
    t.data_groups = 1;
  }

  BenchRow row;
  row.strategy = to_string(strategy);
  row.batch_mode = to_string(mode);
  row.world_size = p;
  row.samples = samples;
  row.sample_groups = t.sample_groups;
  row.data_groups = t.data_groups;
  row.global_batch_size = effective_global_batch(t);
  try {
    cfg.validate();
    std::vector<double> runs;
    for (std::size_t r = 0; r < base.bench.repeats; ++r) runs.push_back(measure_epoch_seconds(cfg, data, scratch));
    row.epoch_seconds = median(runs);
    row.status = "ok";
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
  }
  return row;
}

void fill_ratios(std::vector<BenchRow>& rows, std::size_t begin, std::size_t end, bool use_speedup) {
  const BenchRow* baseline = nullptr;
  for (std::size_t i = begin; i < end; ++i) {
    if (rows[i].world_size == 1 && rows[i].status == "ok") baseline = &rows[i];
  }
  for (std::size_t i = begin; i < end; ++i) {
    BenchRow& row = rows[i];
    if (row.status != "ok") continue;
    if (!baseline || !(baseline->epoch_seconds > 0.0) || !(row.epoch_seconds > 0.0)) {
      row.status = "no P=1 baseline";
      continue;
    }
    row.ratio = use_speedup ? speedup(baseline->epoch_seconds, row.epoch_seconds)
                            : efficiency(baseline->epoch_seconds, row.epoch_seconds);
  }
}

}  // namespace

double measure_epoch_seconds(const ExperimentConfig& cfg, const SplitDataset& data,
                             const std::filesystem::path& scratch) {
  const bool separate_processes = cfg.transport == TransportKind::socket && cfg.train.world_size > 1;
  const std::filesystem::path handoff = scratch / ".bench_epoch_seconds";
  DistributedRun run = train_distributed(
      cfg.train, data, launch_options(cfg), {}, [&](int rank, const BayesianModel&, const TrainResult& result) {
        if (rank == 0 && separate_processes) write_text_file(handoff, format_real(mean_epoch_total(result.timings)));
      });
  if (run.launch.exit_code != kExitOk) throw TransportError(run.launch.first_error);
  if (!separate_processes) return mean_epoch_total(run.results[0].timings);
  std::ifstream in(handoff);
  double seconds = 0.0;
  if (!(in >> seconds)) throw IoError("cannot read worker timing from " + handoff.string());
  in.close();
  std::filesystem::remove(handoff);
  return seconds;
}

std::vector<BenchRow> bench_fixed(const ExperimentConfig& cfg, const SplitDataset& data,
                                  const std::filesystem::path& scratch) {
  std::vector<BenchRow> rows;
  for (Strategy s : {Strategy::sample_parallel, Strategy::data_parallel, Strategy::hybrid}) {
    for (BatchMode m : {BatchMode::fixed_global, BatchMode::fixed_local}) {
      const std::size_t begin = rows.size();
      for (int p : cfg.bench.workers) rows.push_back(run_point(cfg, data, s, m, p, cfg.bench.samples, scratch));
      fill_ratios(rows, begin, rows.size(), true);
    }
  }
  return rows;
}

std::vector<BenchRow> bench_proportional(const ExperimentConfig& cfg, const SplitDataset& data,
                                         const std::filesystem::path& scratch) {
  std::vector<BenchRow> rows;
  for (int p : cfg.bench.workers) {
    rows.push_back(run_point(cfg, data, Strategy::sample_parallel, BatchMode::fixed_global, p,
                             cfg.bench.s_per_worker * static_cast<std::size_t>(p), scratch));
  }
  fill_ratios(rows, 0, rows.size(), false);
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows,
                     const std::string& ratio_name) {
  std::ostringstream out;
  out << "# sampar " << ratio_name << " schema v" << kResultsSchemaVersion << "\n";
  out << "strategy,batch_mode,P,S,global_batch_size,K,G,epoch_seconds," << ratio_name << ",status\n";
  for (const BenchRow& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.strategy << "," << r.batch_mode << "," << r.world_size << "," << r.samples << ","
        << r.global_batch_size << "," << r.sample_groups << "," << r.data_groups << ","
        << format_real(r.epoch_seconds) << "," << format_real(r.ratio) << "," << status << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace sampar
