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
#include <optional>
#include <string>
#include <vector>

#include "sampar/tensor.hpp"

namespace sampar {

// ---------------------------------------------------------------------------
// Series sources

struct SeriesComponent {
  double amplitude = 1.0;
  double period = 24.0;
  double phase = 0.0;

  bool operator==(const SeriesComponent&) const = default;
};

// Sum of sinusoids amplitude * sin(2 pi k / period + phase) plus Gaussian
// noise. Throws ConfigError if length < min_length.
std::vector<double> generate_synthetic_series(std::size_t length, const std::vector<SeriesComponent>& components,
                                              double noise_std, std::uint64_t seed, std::size_t min_length = 1);

struct CsvSeries {
  std::vector<double> values;
  std::size_t filled = 0;  // cells forward-filled from the previous row
};

// Reads one numeric column of a delimited file with a header row. Empty cells
// are forward-filled (and counted). Data rows are numbered from 1 in errors.
CsvSeries load_csv_series(const std::filesystem::path& path, const std::string& column, char delimiter = ',');

// ---------------------------------------------------------------------------
// Supervised datasets

// Per-column affine map fitted on training data: x' = (x - mean) / scale.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> scale;

  bool empty() const { return mean.empty(); }
  static Normalization fit(const Tensor& columns);
  Tensor apply(const Tensor& columns) const;
  Tensor invert(const Tensor& columns) const;
};

struct Dataset {
  Tensor inputs;   // [N x d_in]
  Tensor targets;  // [N x d_out]
  Normalization input_norm;
  Normalization target_norm;

  std::size_t size() const { return inputs.rank() == 2 ? inputs.rows() : 0; }
};

struct WindowSpec {
  std::size_t history = 96;
  std::size_t horizon = 24;
  std::size_t stride = 1;

  void validate() const;
  // floor((T - history - horizon) / stride) + 1, or 0 when T is too short.
  std::size_t count(std::size_t length) const;
  bool operator==(const WindowSpec&) const = default;
};

// Sliding windows: inputs series[i*stride .. +history), targets the following
// `horizon` points. Requires length >= history + horizon.
Dataset window(const std::vector<double>& series, const WindowSpec& spec);

struct SplitDataset {
  Dataset train;
  Dataset validation;
};

// Time-ordered split: the last `fraction` of rows (at least one) become the
// validation set. When `normalize` is set, per-column statistics are fitted
// on the training rows only and applied to both parts.
SplitDataset split_validation(const Dataset& data, double fraction = 0.1, bool normalize = true);

// ---------------------------------------------------------------------------
// Batching

struct Shard {
  std::size_t index = 0;
  std::size_t count = 1;
};

struct Batch {
  std::size_t index = 0;       // position in the epoch
  std::size_t row_offset = 0;  // first row of this shard inside the global batch
  Tensor inputs;
  Tensor targets;
};

// Row order of one epoch: a shuffle seeded by (base_seed, epoch), identical on
// every worker, cut into full batches. The last partial batch is dropped.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t rows, std::size_t batch_size, std::uint64_t epoch,
                                                    std::uint64_t base_seed);

// Batch stream of one epoch. With a shard, each global batch is cut into
// `count` contiguous equal slices and slice `index` is returned.
std::vector<Batch> batches(const Dataset& data, std::size_t batch_size, std::uint64_t epoch, std::uint64_t base_seed,
                           std::optional<Shard> shard = std::nullopt);

// ---------------------------------------------------------------------------
// Synthetic image task

// 8x8 single-channel images of two classes: class 0 shows a horizontal bar,
// class 1 a vertical bar, plus Gaussian pixel noise. Training images only
// place bars in the left/top half of the grid, validation images anywhere,
// so label-preserving flips and crops carry real information.
struct ImageTaskSpec {
  std::size_t side = 8;
  std::size_t train_count = 256;
  std::size_t validation_count = 256;
  double noise_std = 0.3;

  bool operator==(const ImageTaskSpec&) const = default;
};

SplitDataset make_bar_images(const ImageTaskSpec& spec, std::uint64_t seed);

// One-hot class rows -> class indices.
std::vector<std::size_t> labels_from_one_hot(const Tensor& one_hot);

}  // namespace sampar
