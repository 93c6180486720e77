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

#include "sampar/experiment.hpp"

#include <chrono>

#include "sampar/errors.hpp"

namespace sampar {

SplitDataset prepare_experiment(ExperimentConfig& cfg) {
  SplitDataset data;
  const DataConfig& d = cfg.data;
  switch (d.task) {
    case DataTask::series: {
      d.window.validate();
      const auto series = generate_synthetic_series(d.length, d.components, d.noise_std, d.seed,
                                                    d.window.history + d.window.horizon);
      data = split_validation(window(series, d.window), d.validation_fraction);
      break;
    }
    case DataTask::csv: {
      if (d.csv_path.empty()) throw ConfigError("data.csv_path is required for task csv");
      const CsvSeries csv = load_csv_series(d.csv_path, d.csv_column, d.csv_delimiter);
      data = split_validation(window(csv.values, d.window), d.validation_fraction);
      break;
    }
    case DataTask::images:
      data = make_bar_images(d.images, d.seed);
      if (cfg.train.augmentation.image_side == 0) cfg.train.augmentation.image_side = d.images.side;
      break;
  }
  ModelSpec& model = cfg.train.model;
  const std::size_t in = data.train.inputs.cols();
  const std::size_t out = data.train.targets.cols();
  if (model.input_dim == 0) model.input_dim = in;
  if (model.output_dim == 0) model.output_dim = out;
  if (model.input_dim != in || model.output_dim != out) {
    throw ConfigError("model widths " + std::to_string(model.input_dim) + "->" + std::to_string(model.output_dim) +
                      " do not match the data " + std::to_string(in) + "->" + std::to_string(out));
  }
  cfg.validate();
  return data;
}

LaunchOptions launch_options(const ExperimentConfig& cfg) {
  LaunchOptions options;
  options.world_size = cfg.train.world_size;
  options.transport = cfg.transport;
  options.port = cfg.port;
  options.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.timeout_seconds * 1000.0));
  return options;
}

}  // namespace sampar
