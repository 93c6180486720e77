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

#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "sampar/checkpoint.hpp"
#include "sampar/config.hpp"
#include "sampar/errors.hpp"
#include "sampar/experiment.hpp"

using namespace sampar;

namespace {

std::filesystem::path source_root() { return std::filesystem::path(SAMPAR_SOURCE_DIR); }

}  // namespace

TEST_CASE("default config round trips through INI") {
  const ExperimentConfig cfg;
  CHECK(parse_config(to_ini(cfg)) == cfg);
  CHECK(to_ini(parse_config(to_ini(cfg))) == to_ini(cfg));
}

TEST_CASE("every key can be read back after a write") {
  ExperimentConfig cfg;
  for (const std::string& key : config_keys()) {
    const std::string value = get_config_value(cfg, key);
    ExperimentConfig copy;
    set_config_value(copy, key, value);
    INFO(key << " = " << value);
    CHECK(get_config_value(copy, key) == value);
  }
  const auto train = train_config_keys();
  CHECK(train.size() <= config_keys().size());
  for (const std::string& key : train) {
    CHECK(std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end());
  }
}

TEST_CASE("non-default values survive the round trip") {
  ExperimentConfig cfg;
  apply_override(cfg, "run.strategy=hybrid");
  apply_override(cfg, "run.world_size=4");
  apply_override(cfg, "run.sample_groups=2");
  apply_override(cfg, "run.data_groups=2");
  apply_override(cfg, "run.samples=8");
  apply_override(cfg, "model.hidden=7,5,3");
  apply_override(cfg, "model.activation=tanh");
  apply_override(cfg, "loss.kind=gaussian_nll");
  apply_override(cfg, "loss.kl_weight=0.25");
  apply_override(cfg, "optimizer.learning_rate=0.000123456789");
  apply_override(cfg, "augment.kind=periodic_shift");
  apply_override(cfg, "data.components=1:24:0.5,0.25:12:-1");
  apply_override(cfg, "bench.workers=1,3");
  CHECK(cfg.train.strategy == Strategy::hybrid);
  CHECK(cfg.train.model.hidden == std::vector<std::size_t>{7, 5, 3});
  CHECK(cfg.train.optimizer.learning_rate == 0.000123456789);
  CHECK(cfg.data.components.size() == 2);
  CHECK(cfg.data.components[1].phase == -1.0);
  CHECK(cfg.bench.workers == std::vector<int>{1, 3});
  CHECK(parse_config(to_ini(cfg)) == cfg);
}

TEST_CASE("malformed configuration is rejected") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_override(cfg, "run.nonsense=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "run.samples=four"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "run.samples=-1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "run.strategy=ring"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nsamples = 4\n[mystery]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/sampar.ini"), ConfigError);
}

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"default.ini", "scaling.ini"}) {
    INFO(name);
    ExperimentConfig cfg = load_config(source_root() / "configs" / name);
    const SplitDataset data = prepare_experiment(cfg);
    CHECK(cfg.train.model.input_dim == data.train.inputs.cols());
    CHECK(cfg.train.model.output_dim == data.train.targets.cols());
    CHECK_NOTHROW(cfg.validate());
  }
}

TEST_CASE("prepare_experiment reports violated invariants") {
  ExperimentConfig cfg = load_config(source_root() / "configs" / "default.ini");
  apply_override(cfg, "run.strategy=sample_parallel");
  apply_override(cfg, "run.samples=6");
  apply_override(cfg, "run.world_size=4");
  try {
    prepare_experiment(cfg);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("S mod P == 0") != std::string::npos);
    CHECK(std::string(e.what()).find("S=6") != std::string::npos);
  }

  ExperimentConfig images;
  apply_override(images, "data.task=images");
  apply_override(images, "loss.kind=cross_entropy_of_mean_prob");
  apply_override(images, "augment.kind=horizontal_flip");
  apply_override(images, "run.global_batch_size=32");
  const SplitDataset d = prepare_experiment(images);
  CHECK(images.train.augmentation.image_side == 8);
  CHECK(images.train.model.output_dim == 2);
  CHECK(d.train.size() == images.data.images.train_count);
}

TEST_CASE("checkpoint files") {
  ModelSpec spec;
  spec.input_dim = 3;
  spec.hidden = {4};
  spec.output_dim = 2;
  const BayesianModel model(spec, 12);
  const auto path = std::filesystem::temp_directory_path() / "sampar_config_test_model.bin";
  save_checkpoint(model, path);
  const BayesianModel back = load_checkpoint(path);
  CHECK(back.flat_parameters() == model.flat_parameters());
  CHECK(back.method() == model.method());
  CHECK(back.layers().size() == model.layers().size());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
