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
#include <filesystem>
#include <string>
#include <vector>

#include "sampar/data.hpp"
#include "sampar/trainer.hpp"
#include "sampar/transport.hpp"

namespace sampar {

enum class DataTask { series, csv, images };

std::string to_string(DataTask task);
DataTask parse_data_task(const std::string& text);

struct DataConfig {
  DataTask task = DataTask::series;
  std::uint64_t seed = 7;  // data generation only; training streams use run.base_seed
  // series
  std::size_t length = 2000;
  std::vector<SeriesComponent> components = {{1.0, 24.0, 0.0}, {0.5, 168.0, 0.0}};
  double noise_std = 0.1;
  // csv
  std::string csv_path;
  std::string csv_column = "load";
  char csv_delimiter = ',';
  // series and csv
  WindowSpec window;
  double validation_fraction = 0.1;
  // images
  ImageTaskSpec images;

  bool operator==(const DataConfig&) const = default;
};

struct BenchConfig {
  std::vector<int> workers = {1, 2, 4};
  std::size_t samples = 8;       // bench-fixed: S held constant
  std::size_t s_per_worker = 2;  // bench-proportional: S = s_per_worker * P
  std::size_t repeats = 1;       // timing = median over repeats
  std::size_t epochs = 1;
  std::size_t max_steps = 0;

  bool operator==(const BenchConfig&) const = default;
};

// Everything a run needs; what the config file and the manifest hold.
struct ExperimentConfig {
  // Model widths start at 0 ("take them from the data").
  TrainConfig train = [] {
    TrainConfig t;
    t.model.input_dim = 0;
    t.model.output_dim = 0;
    return t;
  }();
  DataConfig data;
  BenchConfig bench;
  TransportKind transport = TransportKind::in_process;
  std::uint16_t port = 0;
  double timeout_seconds = 30.0;

  // Cross-section checks on top of TrainConfig::validate. Needs resolved
  // model widths (see resolve_shapes in experiment.hpp).
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Flat typed key-value document with one [section] per module:
//
//   [run] [model] [loss] [optimizer] [data] [augment] [bench]
//
// Keys are addressed as "section.key" in overrides. Unknown keys and
// malformed values raise ConfigError.
std::vector<std::string> config_keys();
// Keys that belong to the TrainConfig (the manifest must contain all of them).
std::vector<std::string> train_config_keys();

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);
// "key=value"
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_ini(const ExperimentConfig& cfg);

}  // namespace sampar
