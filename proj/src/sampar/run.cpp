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

#include "sampar/run.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <sstream>

#include "sampar/bench.hpp"
#include "sampar/checkpoint.hpp"
#include "sampar/errors.hpp"
#include "sampar/experiment.hpp"
#include "sampar/results.hpp"
#include "sampar/verify.hpp"

namespace sampar {

std::string to_string(Subcommand subcommand) {
  switch (subcommand) {
    case Subcommand::train: return "train";
    case Subcommand::bench_fixed: return "bench-fixed";
    case Subcommand::bench_proportional: return "bench-proportional";
    case Subcommand::verify: return "verify";
  }
  return "unknown";
}

Subcommand parse_subcommand(const std::string& text) {
  for (Subcommand s : {Subcommand::train, Subcommand::bench_fixed, Subcommand::bench_proportional, Subcommand::verify}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown subcommand '" + text + "'");
}

ExperimentConfig resolve_config(const RunSpec& spec) {
  ExperimentConfig cfg = spec.config        ? *spec.config
                         : spec.config_path ? load_config(*spec.config_path)
                                            : ExperimentConfig{};
  for (const std::string& o : spec.overrides) apply_override(cfg, o);
  if (spec.transport) cfg.transport = *spec.transport;
  if (spec.port) cfg.port = *spec.port;
  return cfg;
}

namespace {

RunOutcome run_train(ExperimentConfig& cfg, const SplitDataset& data, const RunSpec& spec) {
  RunOutcome outcome;
  const std::string manifest = manifest_text(cfg, to_string(spec.subcommand));
  LaunchOptions launch = launch_options(cfg);
  launch.kill = spec.kill;
  const std::filesystem::path dir = spec.output_dir;
  const DistributedRun result =
      train_distributed(cfg.train, data, launch, {}, [&](int rank, const BayesianModel& model, const TrainResult& r) {
        if (rank != 0) return;
        emit_results(r.records, r.timings, manifest, dir);
        save_checkpoint(model, dir / "model.bin");
      });
  outcome.exit_code = result.launch.exit_code;
  if (outcome.exit_code != kExitOk) {
    outcome.message = result.launch.first_error;
    return outcome;
  }
  outcome.files = {dir / "metrics.csv", dir / "timings.csv", dir / "manifest.ini", dir / "model.bin"};
  std::ostringstream msg;
  msg << "trained " << to_string(cfg.train.strategy) << " P=" << cfg.train.world_size << " S=" << cfg.train.samples;
  if (!result.results.empty() && !result.results[0].records.empty()) {
    msg << ", final train loss " << format_real(result.results[0].records.back().train_loss);
  }
  outcome.message = msg.str();
  return outcome;
}

RunOutcome run_bench(const ExperimentConfig& cfg, const SplitDataset& data, const RunSpec& spec) {
  RunOutcome outcome;
  const bool fixed = spec.subcommand == Subcommand::bench_fixed;
  const std::vector<BenchRow> rows =
      fixed ? bench_fixed(cfg, data, spec.output_dir) : bench_proportional(cfg, data, spec.output_dir);
  const std::filesystem::path csv = spec.output_dir / (fixed ? "speedup.csv" : "efficiency.csv");
  write_bench_csv(csv, rows, fixed ? "speedup" : "efficiency");
  write_text_file(spec.output_dir / "manifest.ini", manifest_text(cfg, to_string(spec.subcommand)));
  outcome.files = {csv, spec.output_dir / "manifest.ini"};
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.status != "ok"; });
  outcome.message = std::to_string(rows.size()) + " points, " + std::to_string(failed) + " not ok";
  return outcome;
}

RunOutcome run_verify_command(const ExperimentConfig& cfg, const SplitDataset& data, const RunSpec& spec) {
  RunOutcome outcome;
  const std::vector<CheckResult> checks = run_verify(cfg, data);
  const std::filesystem::path csv = spec.output_dir / "verify.csv";
  write_verify_csv(csv, checks);
  write_text_file(spec.output_dir / "manifest.ini", manifest_text(cfg, to_string(spec.subcommand)));
  outcome.files = {csv, spec.output_dir / "manifest.ini"};
  std::ostringstream msg;
  for (const CheckResult& c : checks) {
    msg << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    if (!c.passed) outcome.exit_code = kExitFailure;
  }
  outcome.message = msg.str();
  return outcome;
}

}  // namespace

RunOutcome run(const RunSpec& spec) {
  try {
    ExperimentConfig cfg = resolve_config(spec);
    const SplitDataset data = prepare_experiment(cfg);
    std::filesystem::create_directories(spec.output_dir);
    switch (spec.subcommand) {
      case Subcommand::train: return run_train(cfg, data, spec);
      case Subcommand::bench_fixed:
      case Subcommand::bench_proportional: return run_bench(cfg, data, spec);
      case Subcommand::verify: return run_verify_command(cfg, data, spec);
    }
    throw ContractError("unhandled subcommand");
  } catch (const std::exception& e) {
    RunOutcome outcome;
    outcome.exit_code = exit_code_for(std::current_exception());
    outcome.message = e.what();
    return outcome;
  }
}

}  // namespace sampar
