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

// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sampar/sampar.h"

namespace {

struct Config {
  sampar_config* handle = nullptr;
  Config() { REQUIRE(sampar_config_create(&handle) == SAMPAR_OK); }
  ~Config() { sampar_config_destroy(handle); }
  void set(const char* key, const char* value) {
    INFO(key << " = " << value << ": " << sampar_last_error());
    REQUIRE(sampar_config_set(handle, key, value) == SAMPAR_OK);
  }
  std::string get(const char* key) const {
    std::size_t needed = 0;
    sampar_config_get(handle, key, nullptr, 0, &needed);
    std::string out(needed, '\0');
    REQUIRE(sampar_config_get(handle, key, out.data(), out.size(), &needed) == SAMPAR_OK);
    out.resize(needed - 1);
    return out;
  }
};

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sampar_capi_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

void small_run(Config& c) {
  c.set("data.length", "300");
  c.set("data.history", "12");
  c.set("data.horizon", "4");
  c.set("model.hidden", "8");
  c.set("run.global_batch_size", "16");
  c.set("run.epochs", "2");
}

}  // namespace

TEST_CASE("keys, get and set") {
  Config c;
  const std::size_t n = sampar_config_key_count();
  REQUIRE(n > 0);
  for (std::size_t i = 0; i < n; ++i) {
    const char* key = sampar_config_key(i);
    REQUIRE(key != nullptr);
    const std::string value = c.get(key);
    CHECK(sampar_config_set(c.handle, key, value.c_str()) == SAMPAR_OK);
  }
  c.set("run.samples", "16");
  CHECK(c.get("run.samples") == "16");
  CHECK(sampar_config_set(c.handle, "run.samples", "many") == SAMPAR_ERR_CONFIG);
  CHECK(std::string(sampar_last_error()).find("run.samples") != std::string::npos);

  std::size_t needed = 0;
  CHECK(sampar_config_to_ini(c.handle, nullptr, 0, &needed) == SAMPAR_OK);
  std::string ini(needed, '\0');
  CHECK(sampar_config_to_ini(c.handle, ini.data(), needed - 1, nullptr) == SAMPAR_ERR_ARGUMENT);
  CHECK(sampar_config_to_ini(c.handle, nullptr, 0, nullptr) == SAMPAR_ERR_ARGUMENT);
  REQUIRE(sampar_config_to_ini(c.handle, ini.data(), ini.size(), &needed) == SAMPAR_OK);
  sampar_config* parsed = nullptr;
  REQUIRE(sampar_config_parse(ini.c_str(), &parsed) == SAMPAR_OK);
  std::vector<char> again(needed);
  REQUIRE(sampar_config_to_ini(parsed, again.data(), again.size(), nullptr) == SAMPAR_OK);
  CHECK(std::string(again.data()) == std::string(ini.c_str()));
  sampar_config_destroy(parsed);

  sampar_config* bad = nullptr;
  CHECK(sampar_config_parse("[nowhere]\nx = 1\n", &bad) == SAMPAR_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(sampar_config_load("/nonexistent/sampar.ini", &bad) != SAMPAR_OK);
  CHECK(sampar_config_create(nullptr) == SAMPAR_ERR_ARGUMENT);
}

TEST_CASE("validate reports the violated invariant") {
  Config c;
  CHECK(sampar_config_validate(c.handle) == SAMPAR_OK);
  c.set("run.strategy", "sample_parallel");
  c.set("run.world_size", "4");
  c.set("run.samples", "6");
  CHECK(sampar_config_validate(c.handle) == SAMPAR_ERR_CONFIG);
  CHECK(std::string(sampar_last_error()).find("S mod P == 0") != std::string::npos);
}

TEST_CASE("train writes results and a loadable model") {
  Config c;
  small_run(c);
  const auto dir = scratch("train");
  sampar_run_options options;
  sampar_run_options_init(&options);
  CHECK(options.kill_rank == -1);
  const std::string out = dir.string();
  options.output_dir = out.c_str();
  char summary[512] = {};
  REQUIRE(sampar_run(c.handle, "train", &options, summary, sizeof summary) == SAMPAR_OK);
  for (const char* f : {"metrics.csv", "timings.csv", "manifest.ini", "model.bin"}) {
    CHECK(std::filesystem::exists(dir / f));
  }

  sampar_model* model = nullptr;
  REQUIRE(sampar_model_load((dir / "model.bin").c_str(), &model) == SAMPAR_OK);
  CHECK(sampar_model_input_dim(model) == 12);
  CHECK(sampar_model_output_dim(model) == 4);
  std::vector<double> x(2 * 12, 0.1), mean(2 * 4), sd(2 * 4);
  REQUIRE(sampar_model_predict(model, x.data(), 2, 8, 1, mean.data(), sd.data()) == SAMPAR_OK);
  for (double v : mean) CHECK(std::isfinite(v));
  CHECK(sampar_model_save(model, (dir / "copy.bin").c_str()) == SAMPAR_OK);
  std::ifstream a(dir / "model.bin", std::ios::binary), b(dir / "copy.bin", std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
  sampar_model_destroy(model);

  CHECK(sampar_run(c.handle, "dance", &options, nullptr, 0) == SAMPAR_ERR_ARGUMENT);
  CHECK(sampar_run(c.handle, "train", nullptr, nullptr, 0) == SAMPAR_ERR_ARGUMENT);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run exit codes") {
  Config c;
  small_run(c);
  c.set("run.strategy", "sample_parallel");
  c.set("run.world_size", "4");
  c.set("run.samples", "6");
  const auto dir = scratch("codes");
  const std::string out = dir.string();
  sampar_run_options options;
  sampar_run_options_init(&options);
  options.output_dir = out.c_str();
  char summary[512] = {};
  CHECK(sampar_run(c.handle, "train", &options, summary, sizeof summary) == SAMPAR_ERR_CONFIG);
  CHECK(std::string(summary).find("S mod P == 0") != std::string::npos);

  c.set("run.samples", "4");
  c.set("optimizer.kind", "sgd");
  c.set("optimizer.learning_rate", "1e30");
  CHECK(sampar_run(c.handle, "train", &options, summary, sizeof summary) == SAMPAR_ERR_NUMERIC);
  std::filesystem::remove_all(dir);
}
