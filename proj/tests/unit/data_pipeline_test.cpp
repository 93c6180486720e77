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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "sampar/augment.hpp"
#include "sampar/data.hpp"
#include "sampar/errors.hpp"

using namespace sampar;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("sampar_test_" + name);
  std::ofstream(path) << text;
  return path;
}

std::vector<double> iota_series(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(i);
  return s;
}

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Tensor t(Shape{rows, cols});
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> n(2.0, 3.0);
  for (double& v : t.data()) v = n(engine);
  return t;
}

}  // namespace

TEST_CASE("generate_synthetic_series") {
  const double pi = std::acos(-1.0);
  const auto s = generate_synthetic_series(100, {{1.0, 24.0, 0.0}}, 0.0, 1);
  REQUIRE(s.size() == 100);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k] == std::sin(2.0 * pi * static_cast<double>(k) / 24.0));

  const std::vector<SeriesComponent> comps = {{0.5, 7.0, 0.3}, {2.0, 50.0, -1.0}};
  CHECK(generate_synthetic_series(64, comps, 0.0, 1) == generate_synthetic_series(64, comps, 0.0, 99));
  CHECK(generate_synthetic_series(64, comps, 0.2, 5) == generate_synthetic_series(64, comps, 0.2, 5));

  const std::size_t n = 100000;
  const auto noisy = generate_synthetic_series(n, comps, 0.1, 3);
  const auto clean = generate_synthetic_series(n, comps, 0.0, 3);
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = noisy[i] - clean[i];
  CHECK(std::abs(oracle::population_std(residual) - 0.1) < 0.005);

  CHECK_THROWS_AS(generate_synthetic_series(10, comps, 0.0, 1, 121), ConfigError);
}

TEST_CASE("load_csv_series") {
  auto path = write_temp("a.csv", "time,load\n0,1\n1,2\n2,3\n");
  CsvSeries s = load_csv_series(path, "load");
  CHECK(s.values == std::vector<double>{1, 2, 3});
  CHECK(s.filled == 0);

  path = write_temp("b.csv", "time;load\n0;1\n1;\n2;3\n");
  s = load_csv_series(path, "load", ';');
  CHECK(s.values == std::vector<double>{1, 1, 3});
  CHECK(s.filled == 1);

  path = write_temp("c.csv", "time,load\n0,1\n1,abc\n2,3\n");
  try {
    load_csv_series(path, "load");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("load") != std::string::npos);
  }

  CHECK_THROWS_AS(load_csv_series(write_temp("d.csv", ""), "load"), IoError);
  CHECK_THROWS_AS(load_csv_series(write_temp("e.csv", "time,load\n"), "load"), IoError);
  CHECK_THROWS_AS(load_csv_series(write_temp("f.csv", "time,other\n0,1\n"), "load"), IoError);
  CHECK_THROWS_AS(load_csv_series(write_temp("g.csv", "time,load\n0,\n1,2\n"), "load"), IoError);
  CHECK_THROWS_AS(load_csv_series(write_temp("h.csv", "time,load\n0,inf\n"), "load"), IoError);
  CHECK_THROWS_AS(load_csv_series("/nonexistent/sampar.csv", "load"), IoError);
}

TEST_CASE("window") {
  const WindowSpec spec{96, 24, 1};
  // Enumerate window starts directly.
  auto enumerate = [](std::size_t t, const WindowSpec& w) {
    std::size_t n = 0;
    for (std::size_t start = 0; start + w.history + w.horizon <= t; start += w.stride) ++n;
    return n;
  };
  CHECK(spec.count(121) == 2);
  CHECK(spec.count(120) == 1);
  CHECK(spec.count(119) == 0);
  for (std::size_t t = 100; t < 300; t += 7) {
    for (std::size_t stride : {1, 3, 24}) {
      CHECK(WindowSpec{96, 24, stride}.count(t) == enumerate(t, WindowSpec{96, 24, stride}));
    }
  }

  const auto series = iota_series(121);
  const Dataset d = window(series, spec);
  CHECK(d.size() == 2);
  CHECK(d.inputs.cols() == 96);
  CHECK(d.targets.cols() == 24);
  std::vector<double> first(d.inputs.values().begin(), d.inputs.values().begin() + 96);
  first.insert(first.end(), d.targets.values().begin(), d.targets.values().begin() + 24);
  CHECK(first == std::vector<double>(series.begin(), series.begin() + 120));
  CHECK(d.inputs.at(1, 0) == 1.0);

  CHECK(window(iota_series(120), spec).size() == 1);
  CHECK_THROWS_AS(window(iota_series(119), spec), ConfigError);
  CHECK_THROWS_AS((WindowSpec{0, 24, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((WindowSpec{96, 0, 1}.validate()), ConfigError);
}

TEST_CASE("normalization") {
  const Tensor x = random_matrix(50, 4, 1);
  const Normalization n = Normalization::fit(x);
  const Tensor z = n.apply(x);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < 50; ++r) col.push_back(z.at(r, c));
    CHECK(std::abs(oracle::mean(col)) < 1e-12);
    CHECK(oracle::population_std(col) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Tensor back = n.invert(z);
  CHECK(oracle::max_relative_difference(back.values(), x.values()) < 1e-10);

  // A constant column does not blow up.
  const Tensor c = Tensor::matrix(3, 1, {5.0, 5.0, 5.0});
  for (double v : Normalization::fit(c).apply(c).values()) CHECK(std::isfinite(v));
}

TEST_CASE("validation split is time ordered and fitted on training rows") {
  Dataset d = window(iota_series(200), WindowSpec{8, 2, 1});
  const std::size_t n = d.size();
  const SplitDataset raw = split_validation(d, 0.1, false);
  CHECK(raw.validation.size() == n / 10);  // floor, at least one row
  CHECK(raw.train.size() + raw.validation.size() == n);
  CHECK(raw.validation.inputs.at(0, 0) == static_cast<double>(raw.train.size()));

  const SplitDataset norm = split_validation(d, 0.1, true);
  const Normalization fitted = Normalization::fit(raw.train.inputs);
  CHECK(norm.train.input_norm.mean == fitted.mean);
  CHECK(norm.validation.inputs.values() == fitted.apply(raw.validation.inputs).values());
  CHECK(norm.train.targets.values() == Normalization::fit(raw.train.targets).apply(raw.train.targets).values());

  const SplitDataset tiny = split_validation(window(iota_series(11), WindowSpec{8, 2, 1}), 0.1, false);
  CHECK(tiny.validation.size() == 1);
}

TEST_CASE("batches") {
  const Dataset d = window(iota_series(30), WindowSpec{3, 1, 1});  // 27 rows
  const auto unsharded = batches(d, 8, 0, 5);
  CHECK(unsharded.size() == 3);
  CHECK(batches(d, 8, 0, 5, Shard{0, 1})[1].inputs.values() == unsharded[1].inputs.values());
  CHECK(batches(d, 8, 0, 5)[2].targets.values() == unsharded[2].targets.values());
  CHECK(batches(d, 8, 1, 5)[0].inputs.values() != unsharded[0].inputs.values());

  const auto order = epoch_batches(10, 4, 0, 1);
  CHECK(order.size() == 2);
  std::set<std::size_t> used;
  for (const auto& b : order) used.insert(b.begin(), b.end());
  CHECK(used.size() == 8);

  // Shards of one global batch are disjoint contiguous slices covering it.
  for (std::size_t g : {2, 4}) {
    for (std::size_t bi = 0; bi < unsharded.size(); ++bi) {
      std::vector<double> joined;
      for (std::size_t s = 0; s < g; ++s) {
        const Batch part = batches(d, 8, 0, 5, Shard{s, g})[bi];
        CHECK(part.row_offset == s * (8 / g));
        CHECK(part.index == bi);
        joined.insert(joined.end(), part.inputs.values().begin(), part.inputs.values().end());
      }
      CHECK(joined == unsharded[bi].inputs.values());
    }
  }
  CHECK_THROWS(batches(d, 8, 0, 5, Shard{2, 2}));
  CHECK_THROWS(batches(d, 0, 0, 5));
}

TEST_CASE("augment") {
  const Tensor x = random_matrix(6, 12, 4);
  Augmentation none;
  CHECK(augment(x, none, 1).values() == x.values());

  Augmentation jitter;
  jitter.kind = AugmentKind::additive_jitter;
  jitter.jitter_scale = 0.1;
  CHECK(augment(x, jitter, 1).values() == augment(x, jitter, 1).values());
  CHECK(augment(x, jitter, 1).values() != augment(x, jitter, 2).values());
  const Tensor j = augment(x, jitter, 1);
  std::vector<double> diff;
  for (std::size_t i = 0; i < x.size(); ++i) diff.push_back(j[i] - x[i]);
  CHECK(oracle::population_std(diff) < 0.2);

  for (long s : {-5L, -1L, 0L, 3L, 12L}) {
    CHECK(periodic_shift(periodic_shift(x, s), -s).values() == x.values());
  }
  CHECK(periodic_shift(Tensor::matrix(1, 4, {1, 2, 3, 4}), 1).values() == std::vector<double>{4, 1, 2, 3});

  Augmentation shift;
  shift.kind = AugmentKind::periodic_shift;
  shift.max_shift = 3;
  const Tensor shifted = augment(x, shift, 9);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<double> a, b;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      a.push_back(x.at(r, c));
      b.push_back(shifted.at(r, c));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);  // a roll permutes the row
  }

  // A shard augments exactly like the same rows in the full batch.
  const Tensor full = augment(x, jitter, 7);
  const Tensor tail = augment(Tensor(Shape{3, 12}, std::vector<double>(x.values().begin() + 36, x.values().end())),
                              jitter, 7, 3);
  CHECK(std::vector<double>(full.values().begin() + 36, full.values().end()) == tail.values());

  Augmentation flip;
  flip.kind = AugmentKind::horizontal_flip;
  CHECK_THROWS_AS(flip.validate(12), ConfigError);
  flip.image_side = 4;
  CHECK_THROWS_AS(flip.validate(12), ConfigError);
  CHECK_NOTHROW(flip.validate(16));
  flip.flip_prob = 1.0;
  const Tensor img = Tensor::matrix(1, 4, {1, 2, 3, 4});
  flip.image_side = 2;
  CHECK(augment(img, flip, 1).values() == std::vector<double>{2, 1, 4, 3});

  Augmentation crop;
  crop.kind = AugmentKind::random_crop;
  crop.image_side = 4;
  crop.crop_pad = 1;
  const Tensor ones(Shape{20, 16}, 1.0);
  const Tensor cropped = augment(ones, crop, 3);
  for (double v : cropped.values()) CHECK((v == 0.0 || v == 1.0));
  CHECK(augment(ones, crop, 3).values() == cropped.values());
}

TEST_CASE("bar image task") {
  const SplitDataset d = make_bar_images(ImageTaskSpec{8, 40, 30, 0.3}, 2);
  CHECK(d.train.size() == 40);
  CHECK(d.validation.size() == 30);
  CHECK(d.train.inputs.cols() == 64);
  CHECK(d.train.targets.cols() == 2);
  const auto labels = labels_from_one_hot(d.train.targets);
  std::set<std::size_t> classes(labels.begin(), labels.end());
  CHECK(classes == std::set<std::size_t>{0, 1});
  CHECK(make_bar_images(ImageTaskSpec{8, 40, 30, 0.3}, 2).train.inputs.values() == d.train.inputs.values());
}
