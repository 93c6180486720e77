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
#include <optional>
#include <string>
#include <vector>

#include "sampar/config.hpp"
#include "sampar/launcher.hpp"

namespace sampar {

enum class Subcommand { train, bench_fixed, bench_proportional, verify };

std::string to_string(Subcommand subcommand);
Subcommand parse_subcommand(const std::string& text);

// One CLI invocation. Overrides are "section.key=value" and are applied after
// the config file; transport and port, when set, win over both.
struct RunSpec {
  Subcommand subcommand = Subcommand::train;
  std::optional<std::filesystem::path> config_path;
  // Used instead of config_path when set (the C API hands over a live config).
  std::optional<ExperimentConfig> config;
  std::vector<std::string> overrides;
  std::filesystem::path output_dir = "results";
  std::optional<TransportKind> transport;
  std::optional<std::uint16_t> port;
  std::optional<KillInjection> kill;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;  // first error, or a one-line summary on success
  std::vector<std::filesystem::path> files;
};

// Resolves the configuration of a RunSpec without running anything.
ExperimentConfig resolve_config(const RunSpec& spec);

// Runs a subcommand and writes its outputs into spec.output_dir:
//   train               metrics.csv, timings.csv, manifest.ini, model.bin
//   bench-fixed         speedup.csv, manifest.ini
//   bench-proportional  efficiency.csv, manifest.ini
//   verify              verify.csv, manifest.ini (exit 1 if any check fails)
// Never throws; errors map to exit codes as in exit_code_for().
RunOutcome run(const RunSpec& spec);

}  // namespace sampar
