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
#include <sstream>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "sampar/config.hpp"
#include "sampar/errors.hpp"
#include "sampar/launcher.hpp"
#include "sampar/metrics.hpp"
#include "sampar/results.hpp"

using namespace sampar;
using namespace std::chrono_literals;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sampar_metrics_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("speedup and efficiency") {
  CHECK(speedup(100.0, 25.0) == 4.0);
  CHECK(speedup(7.0, 7.0) == 1.0);
  CHECK(speedup(100.0, 110.0) == doctest::Approx(0.909090909).epsilon(1e-8));
  CHECK(efficiency(3.0, 3.0) == 1.0);
  CHECK(efficiency(100.0, 125.0) == 0.8);
  CHECK_THROWS_AS(speedup(0.0, 1.0), ContractError);
  CHECK_THROWS_AS(speedup(1.0, -1.0), ContractError);
  CHECK_THROWS_AS(efficiency(1.0, 0.0), ContractError);
  CHECK_THROWS_AS(efficiency(std::nan(""), 1.0), ContractError);
}

TEST_CASE("classification_nll") {
  const Tensor confident = Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
  CHECK(classification_nll(confident, {0, 1}) == doctest::Approx(0.0));
  Tensor uniform(Shape{3, 10}, 0.1);
  CHECK(classification_nll(uniform, {0, 4, 9}) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(classification_nll(uniform, {0, 4, 9}) == doctest::Approx(2.3026).epsilon(1e-4));
  const double floored = classification_nll(confident, {1, 0});
  CHECK(std::isfinite(floored));
  CHECK(floored == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
  CHECK_THROWS_AS(classification_nll(Tensor::matrix(1, 2, {0.5, 0.6}), {0}), ContractError);
  CHECK_THROWS_AS(classification_nll(confident, {0}), DimensionError);
  CHECK(accuracy(Tensor::matrix(3, 2, {0.9, 0.1, 0.3, 0.7, 0.6, 0.4}), {0, 1, 1}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("Jensen: NLL of the mean probability is at most the mean per-sample NLL") {
  std::mt19937_64 engine(10);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> pick(0, 4);
  for (int set = 0; set < 1000; ++set) {
    const std::size_t samples = 2 + static_cast<std::size_t>(set % 7);
    const std::size_t rows = 3;
    std::vector<std::size_t> labels(rows);
    for (auto& l : labels) l = pick(engine);
    Tensor mean(Shape{rows, 5});
    double per_sample = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      Tensor logits(Shape{rows, 5});
      for (double& v : logits.data()) v = n(engine);
      Tensor p(Shape{rows, 5});
      for (std::size_t r = 0; r < rows; ++r) {
        double z = 0.0;
        for (std::size_t c = 0; c < 5; ++c) z += std::exp(logits.at(r, c));
        for (std::size_t c = 0; c < 5; ++c) p.at(r, c) = std::exp(logits.at(r, c)) / z;
      }
      per_sample += classification_nll(p, labels) / static_cast<double>(samples);
      for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i] / static_cast<double>(samples);
    }
    CHECK(classification_nll(mean, labels) <= per_sample + 1e-12);
  }
}

TEST_CASE("central interval quantile") {
  for (double q : default_calibration_levels()) {
    CHECK(std::erf(central_interval_z(q) / std::sqrt(2.0)) == doctest::Approx(q).epsilon(1e-12));
  }
  CHECK(central_interval_z(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  const auto levels = default_calibration_levels();
  CHECK(levels.size() == 19);
  CHECK(levels.front() == doctest::Approx(0.05));
  CHECK(levels.back() == doctest::Approx(0.95));
}

TEST_CASE("mace examples") {
  const std::size_t n = 1000000;
  Tensor mean(Shape{n}), sd(Shape{n}), y(Shape{n});
  std::mt19937_64 engine(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] = normal(engine) * 5.0;
    sd[i] = u(engine);
    y[i] = mean[i] + sd[i] * normal(engine);
  }
  const double self = mace(mean, sd, y);
  INFO("self-consistent MACE " << self);
  CHECK(self < 0.01);

  // Rescaling everything by a positive factor changes nothing.
  Tensor m2 = mean, s2 = sd, y2 = y;
  for (std::size_t i = 0; i < n; ++i) {
    m2[i] *= 4.0;
    s2[i] *= 4.0;
    y2[i] *= 4.0;
  }
  CHECK(mace(m2, s2, y2) == self);

  // Zero spread and every target off the mean: coverage 0 at every level.
  const Tensor zero(Shape{4}, 0.0);
  CHECK(mace(zero, zero, Tensor::vector({1.0, -2.0, 0.5, 3.0})) == doctest::Approx(0.5).epsilon(1e-12));

  // Hand-built: z(0.5) ~ 0.6745, unit std, two of four targets inside.
  const Tensor unit(Shape{4}, 1.0);
  CHECK(mace(zero, unit, Tensor::vector({0.1, -0.5, 2.0, -3.0}), {0.5}) == 0.0);
  CHECK(mace(zero, unit, Tensor::vector({0.1, -0.5, 0.2, -3.0}), {0.5}) == doctest::Approx(0.25));

  CHECK_THROWS_AS(mace(Tensor(Shape{0}), Tensor(Shape{0}), Tensor(Shape{0})), ContractError);
  CHECK_THROWS_AS(mace(zero, Tensor::vector({1.0, -1.0, 1.0, 1.0}), zero), ContractError);
  CHECK_THROWS_AS(mace(zero, unit, zero, {1.0}), ContractError);
}

TEST_CASE("classification mace") {
  // Bins of width 0.1: confidences 0.95 (two rows, one right) and 0.65 (one row, right).
  const Tensor p = Tensor::matrix(3, 2, {0.95, 0.05, 0.05, 0.95, 0.35, 0.65});
  const double expected = (std::abs(0.5 - 0.95) + std::abs(1.0 - 0.65)) / 2.0;
  CHECK(classification_mace(p, {0, 0, 1}) == doctest::Approx(expected).epsilon(1e-12));
  const double m = classification_mace(p, {1, 0, 0});
  CHECK(m >= 0.0);
  CHECK(m <= 1.0);
}

TEST_CASE("timed_epoch") {
  ProcessGroup single = ProcessGroup::single();
  auto body = [](PhaseTimer& t) {
    {
      auto s = t.scope(Phase::forward);
      std::this_thread::sleep_for(100ms);
    }
    {
      auto s = t.scope(Phase::backward);
      std::this_thread::sleep_for(10ms);
    }
  };
  const auto a = timed_epoch(0, body, single);
  const auto b = timed_epoch(1, body, single);
  REQUIRE(a.size() == b.size());
  double total = 0.0, phases = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].phase == b[i].phase);
    CHECK(a[i].epoch == 0);
    if (a[i].phase == Phase::epoch_total) {
      total = a[i].seconds;
    } else {
      phases += a[i].seconds;
    }
    if (a[i].phase == Phase::forward) CHECK(a[i].seconds >= 0.1);
  }
  CHECK(phases <= total * 1.05);
  CHECK(phases >= total * 0.95);

  // The slowest worker defines every rank's numbers.
  std::vector<double> forward(2);
  LaunchOptions launch;
  launch.world_size = 2;
  REQUIRE(launch_workers(launch, [&](ProcessGroup& g) {
            const auto t = timed_epoch(
                0,
                [&](PhaseTimer& timer) {
                  auto s = timer.scope(Phase::forward);
                  if (g.rank() == 1) std::this_thread::sleep_for(60ms);
                },
                g);
            for (const TimingSample& x : t) {
              if (x.phase == Phase::forward) forward[static_cast<std::size_t>(g.rank())] = x.seconds;
            }
          }).exit_code == 0);
  CHECK(forward[0] >= 0.06);
  CHECK(forward[0] == forward[1]);
}

TEST_CASE("result files") {
  const auto dir = scratch_dir("emit");
  ExperimentConfig cfg;
  const std::string manifest = manifest_text(cfg, "train");
  EmittedFiles files = emit_results({}, {}, manifest, dir);
  CHECK(read_metrics_csv(files.metrics).empty());
  const std::string empty = slurp(files.metrics);
  CHECK(empty.rfind("# ", 0) == 0);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);  // comment and header only

  std::vector<MetricsRecord> records;
  for (std::size_t e = 0; e < 3; ++e) {
    MetricsRecord r;
    r.epoch = e;
    r.cumulative_wall_seconds = 0.125 * static_cast<double>(e + 1) + 1.0 / 3.0;
    r.train_loss = std::exp(-static_cast<double>(e)) * 1e-7;
    r.eval_metric = 0.1 + 1e-17;
    r.nll = -1.5;
    r.mace = 0.0123456789012345;
    r.strategy = "hybrid";
    r.world_size = 4;
    r.samples = 8;
    r.global_batch_size = 64;
    records.push_back(r);
  }
  const std::vector<TimingSample> timings = {{0, Phase::forward, 0.1}, {0, Phase::epoch_total, 1.0 / 7.0}};
  files = emit_results(records, timings, manifest, dir);
  CHECK(read_metrics_csv(files.metrics) == records);
  CHECK(read_timings_csv(files.timings) == timings);
  CHECK(parse_config(slurp(files.manifest)) == cfg);

  // Every TrainConfig key appears in the manifest.
  const std::string text = slurp(files.manifest);
  std::size_t found = 0;
  for (const std::string& key : train_config_keys()) {
    const std::string leaf = key.substr(key.find('.') + 1);
    if (text.find("\n" + leaf + " = ") != std::string::npos) ++found;
  }
  CHECK(found == train_config_keys().size());
  CHECK(text.find("[seed_recipe]") != std::string::npos);

  CHECK_THROWS_AS(emit_results(records, timings, manifest, "/proc/sampar/forbidden"), IoError);
  std::filesystem::remove_all(dir);
}
