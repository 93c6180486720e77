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
#include "sampar/metrics.hpp"
#include "sampar/trainer.hpp"

namespace sampar {

// Bumped whenever a CSV column or manifest section changes meaning.
inline constexpr int kResultsSchemaVersion = 1;

// git describe of the build.
std::string engine_version();

// Column lists, in order.
std::vector<std::string> metrics_columns();
std::vector<std::string> timing_columns();

// Manifest: [engine] and [seed_recipe] provenance sections followed by the
// complete configuration. parse_config() reads it back (provenance sections
// are skipped).
std::string manifest_text(const ExperimentConfig& cfg, const std::string& subcommand);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);
void write_timings_csv(const std::filesystem::path& path, const std::vector<TimingSample>& timings);
std::vector<TimingSample> read_timings_csv(const std::filesystem::path& path);

struct EmittedFiles {
  std::filesystem::path metrics;
  std::filesystem::path timings;
  std::filesystem::path manifest;
};

// Writes metrics.csv, timings.csv and manifest.ini into `dir` (created if
// missing). I/O failures raise IoError naming the path.
EmittedFiles emit_results(const std::vector<MetricsRecord>& records, const std::vector<TimingSample>& timings,
                          const std::string& manifest, const std::filesystem::path& dir);

// Writes text to a file, raising IoError with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Splits a CSV file into rows of cells, skipping '#' comment lines and the
// header row (which must equal `columns`).
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path,
                                                    const std::vector<std::string>& columns);

std::string format_real(double value);

}  // namespace sampar
