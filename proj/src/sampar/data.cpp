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

#include "sampar/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "sampar/errors.hpp"
#include "sampar/random.hpp"

namespace sampar {

std::vector<double> generate_synthetic_series(std::size_t length, const std::vector<SeriesComponent>& components,
                                              double noise_std, std::uint64_t seed, std::size_t min_length) {
  if (length < min_length || length == 0) {
    throw ConfigError("synthetic series length " + std::to_string(length) + " is shorter than the required " +
                      std::to_string(min_length));
  }
  if (!(noise_std >= 0.0)) throw ConfigError("series noise_std must be >= 0");
  std::vector<double> series(length, 0.0);
  for (const SeriesComponent& c : components) {
    if (!(c.period > 0.0)) throw ConfigError("series component period must be positive");
    for (std::size_t k = 0; k < length; ++k) {
      series[k] += c.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / c.period + c.phase);
    }
  }
  if (noise_std > 0.0) {
    std::mt19937_64 engine(derive_seed(seed, StreamTag::data, 0, 0, 0));
    std::normal_distribution<double> normal(0.0, noise_std);
    for (double& v : series) v += normal(engine);
  }
  return series;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == delimiter) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

CsvSeries load_csv_series(const std::filesystem::path& path, const std::string& column, char delimiter) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split_line(line, delimiter);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) col = i;
  }
  if (col == header.size()) throw ParseError(path.string() + ": no column named '" + column + "'");

  CsvSeries out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line, delimiter);
    const std::string cell = col < cells.size() ? trim(cells[col]) : std::string{};
    if (cell.empty()) {
      if (out.values.empty()) {
        throw ParseError(path.string() + ": row " + std::to_string(row) + ", column '" + column +
                         "': missing value with no earlier row to forward-fill from");
      }
      out.values.push_back(out.values.back());
      ++out.filled;
      continue;
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(value)) {
      throw ParseError(path.string() + ": row " + std::to_string(row) + ", column '" + column +
                       "': cannot parse '" + cell + "' as a finite number");
    }
    out.values.push_back(value);
  }
  if (out.values.empty()) throw ParseError(path.string() + ": no data rows");
  return out;
}

// ---------------------------------------------------------------------------

Normalization Normalization::fit(const Tensor& columns) {
  const std::size_t rows = columns.rows();
  const std::size_t cols = columns.cols();
  if (rows == 0) throw ContractError("cannot fit normalization on zero rows");
  Normalization n{std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) n.mean[c] += columns.at(r, c);
  }
  for (double& m : n.mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = columns.at(r, c) - n.mean[c];
      n.scale[c] += d * d;
    }
  }
  for (double& s : n.scale) {
    s = std::sqrt(s / static_cast<double>(rows));
    if (s < 1e-12) s = 1.0;  // constant column
  }
  return n;
}

Tensor Normalization::apply(const Tensor& columns) const {
  if (columns.cols() != mean.size()) throw DimensionError("normalization width mismatch");
  Tensor out(columns.shape());
  for (std::size_t r = 0; r < columns.rows(); ++r) {
    for (std::size_t c = 0; c < mean.size(); ++c) out.at(r, c) = (columns.at(r, c) - mean[c]) / scale[c];
  }
  return out;
}

Tensor Normalization::invert(const Tensor& columns) const {
  if (columns.cols() != mean.size()) throw DimensionError("normalization width mismatch");
  Tensor out(columns.shape());
  for (std::size_t r = 0; r < columns.rows(); ++r) {
    for (std::size_t c = 0; c < mean.size(); ++c) out.at(r, c) = columns.at(r, c) * scale[c] + mean[c];
  }
  return out;
}

void WindowSpec::validate() const {
  if (history < 1) throw ConfigError("window history must be >= 1");
  if (horizon < 1) throw ConfigError("window horizon must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
}

std::size_t WindowSpec::count(std::size_t length) const {
  if (length < history + horizon) return 0;
  return (length - history - horizon) / stride + 1;
}

Dataset window(const std::vector<double>& series, const WindowSpec& spec) {
  spec.validate();
  const std::size_t n = spec.count(series.size());
  if (n == 0) {
    throw ConfigError("series of length " + std::to_string(series.size()) + " is too short for history " +
                      std::to_string(spec.history) + " + horizon " + std::to_string(spec.horizon));
  }
  Dataset d{Tensor(Shape{n, spec.history}), Tensor(Shape{n, spec.horizon}), {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i * spec.stride;
    for (std::size_t j = 0; j < spec.history; ++j) d.inputs.at(i, j) = series[start + j];
    for (std::size_t j = 0; j < spec.horizon; ++j) d.targets.at(i, j) = series[start + spec.history + j];
  }
  return d;
}

SplitDataset split_validation(const Dataset& data, double fraction, bool normalize) {
  const std::size_t n = data.size();
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("validation fraction must lie in (0, 1)");
  if (n < 2) throw ConfigError("need at least two rows to split off a validation set");
  std::size_t val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  val = std::clamp<std::size_t>(val, 1, n - 1);
  const std::size_t train = n - val;

  SplitDataset out;
  out.train.inputs = data.inputs.slice_rows(0, train);
  out.train.targets = data.targets.slice_rows(0, train);
  out.validation.inputs = data.inputs.slice_rows(train, n);
  out.validation.targets = data.targets.slice_rows(train, n);
  if (normalize) {
    const Normalization in = Normalization::fit(out.train.inputs);
    const Normalization tg = Normalization::fit(out.train.targets);
    for (Dataset* d : {&out.train, &out.validation}) {
      d->inputs = in.apply(d->inputs);
      d->targets = tg.apply(d->targets);
      d->input_norm = in;
      d->target_norm = tg;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t rows, std::size_t batch_size, std::uint64_t epoch,
                                                    std::uint64_t base_seed) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  std::mt19937_64 engine(derive_seed(base_seed, StreamTag::shuffle, epoch, 0, 0));
  std::shuffle(order.begin(), order.end(), engine);

  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; (b + 1) * batch_size <= rows; ++b) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b * batch_size),
                     order.begin() + static_cast<std::ptrdiff_t>((b + 1) * batch_size));
  }
  return out;
}

std::vector<Batch> batches(const Dataset& data, std::size_t batch_size, std::uint64_t epoch, std::uint64_t base_seed,
                           std::optional<Shard> shard) {
  const Shard s = shard.value_or(Shard{});
  if (s.count < 1 || s.index >= s.count) throw ContractError("shard index out of range");
  if (batch_size % s.count != 0) {
    throw ContractError("batch size " + std::to_string(batch_size) + " does not split into " +
                        std::to_string(s.count) + " equal shards");
  }
  const std::size_t width = batch_size / s.count;
  std::vector<Batch> out;
  const auto plan = epoch_batches(data.size(), batch_size, epoch, base_seed);
  out.reserve(plan.size());
  for (std::size_t b = 0; b < plan.size(); ++b) {
    const std::span<const std::size_t> rows(plan[b].data() + s.index * width, width);
    out.push_back({b, s.index * width, data.inputs.gather_rows(rows), data.targets.gather_rows(rows)});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Half-grid placement for training images, full grid for validation.
Dataset bar_images(const ImageTaskSpec& spec, std::size_t count, bool restricted, std::mt19937_64& engine) {
  const std::size_t side = spec.side;
  Dataset d{Tensor(Shape{count, side * side}), Tensor(Shape{count, 2}), {}, {}};
  std::normal_distribution<double> noise(0.0, spec.noise_std);
  const std::size_t positions = restricted ? side / 2 : side;
  std::uniform_int_distribution<std::size_t> where(0, positions - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = i % 2;
    const std::size_t at = where(engine);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const bool on = label == 0 ? r == at : c == at;
        d.inputs.at(i, r * side + c) = (on ? 1.0 : 0.0) + noise(engine);
      }
    }
    d.targets.at(i, label) = 1.0;
  }
  return d;
}

}  // namespace

SplitDataset make_bar_images(const ImageTaskSpec& spec, std::uint64_t seed) {
  if (spec.side < 2) throw ConfigError("image side must be >= 2");
  if (spec.train_count < 2 || spec.validation_count < 2) throw ConfigError("image task needs >= 2 images per split");
  std::mt19937_64 engine(derive_seed(seed, StreamTag::data, 1, 0, 0));
  SplitDataset out;
  out.train = bar_images(spec, spec.train_count, true, engine);
  out.validation = bar_images(spec, spec.validation_count, false, engine);
  return out;
}

std::vector<std::size_t> labels_from_one_hot(const Tensor& one_hot) {
  std::vector<std::size_t> labels(one_hot.rows());
  for (std::size_t r = 0; r < one_hot.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < one_hot.cols(); ++c) {
      if (one_hot.at(r, c) > one_hot.at(r, best)) best = c;
    }
    labels[r] = best;
  }
  return labels;
}

}  // namespace sampar
