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

#include "sampar/sampar.h"

#include <cstring>
#include <exception>
#include <string>

#include "sampar/checkpoint.hpp"
#include "sampar/config.hpp"
#include "sampar/errors.hpp"
#include "sampar/experiment.hpp"
#include "sampar/predictive.hpp"
#include "sampar/results.hpp"
#include "sampar/run.hpp"

struct sampar_config {
  sampar::ExperimentConfig value;
};

struct sampar_model {
  sampar::BayesianModel value;
};

namespace {

thread_local std::string last_error;

sampar_status fail(sampar_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

sampar_status from_exception() {
  try {
    throw;
  } catch (const std::exception& e) {
    return fail(static_cast<sampar_status>(sampar::exit_code_for(std::current_exception())), e.what());
  } catch (...) {
    return fail(SAMPAR_ERR_FAILURE, "unknown error");
  }
}

template <class F>
sampar_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (...) {
    return from_exception();
  }
}

sampar_status copy_out(const std::string& text, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buffer) return needed ? SAMPAR_OK : fail(SAMPAR_ERR_ARGUMENT, "null buffer");
  if (capacity < text.size() + 1) return fail(SAMPAR_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return SAMPAR_OK;
}

#define SAMPAR_REQUIRE(cond) \
  if (!(cond)) return fail(SAMPAR_ERR_ARGUMENT, "null argument: " #cond)

}  // namespace

extern "C" {

const char* sampar_version(void) {
  static const std::string version = sampar::engine_version();
  return version.c_str();
}

const char* sampar_last_error(void) { return last_error.c_str(); }

sampar_status sampar_config_create(sampar_config** out) {
  SAMPAR_REQUIRE(out);
  return guarded([&] {
    *out = new sampar_config{};
    return SAMPAR_OK;
  });
}

sampar_status sampar_config_load(const char* path, sampar_config** out) {
  SAMPAR_REQUIRE(path && out);
  return guarded([&] {
    *out = new sampar_config{sampar::load_config(path)};
    return SAMPAR_OK;
  });
}

sampar_status sampar_config_parse(const char* ini_text, sampar_config** out) {
  SAMPAR_REQUIRE(ini_text && out);
  return guarded([&] {
    *out = new sampar_config{sampar::parse_config(ini_text)};
    return SAMPAR_OK;
  });
}

void sampar_config_destroy(sampar_config* config) { delete config; }

sampar_status sampar_config_set(sampar_config* config, const char* key, const char* value) {
  SAMPAR_REQUIRE(config && key && value);
  return guarded([&] {
    sampar::set_config_value(config->value, key, value);
    return SAMPAR_OK;
  });
}

sampar_status sampar_config_get(const sampar_config* config, const char* key, char* buffer, size_t capacity,
                                size_t* needed) {
  SAMPAR_REQUIRE(config && key);
  return guarded([&] { return copy_out(sampar::get_config_value(config->value, key), buffer, capacity, needed); });
}

size_t sampar_config_key_count(void) { return sampar::config_keys().size(); }

const char* sampar_config_key(size_t index) {
  static const std::vector<std::string> keys = sampar::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

sampar_status sampar_config_to_ini(const sampar_config* config, char* buffer, size_t capacity, size_t* needed) {
  SAMPAR_REQUIRE(config);
  return guarded([&] { return copy_out(sampar::to_ini(config->value), buffer, capacity, needed); });
}

sampar_status sampar_config_validate(const sampar_config* config) {
  SAMPAR_REQUIRE(config);
  return guarded([&] {
    sampar::ExperimentConfig copy = config->value;
    sampar::prepare_experiment(copy);
    return SAMPAR_OK;
  });
}

void sampar_run_options_init(sampar_run_options* options) {
  if (!options) return;
  options->output_dir = nullptr;
  options->kill_rank = -1;
  options->kill_after_ms = 0;
}

sampar_status sampar_run(const sampar_config* config, const char* subcommand, const sampar_run_options* options,
                         char* summary, size_t capacity) {
  SAMPAR_REQUIRE(config && subcommand && options && options->output_dir);
  sampar::RunSpec spec;
  try {
    spec.subcommand = sampar::parse_subcommand(subcommand);
  } catch (const std::exception& e) {
    return fail(SAMPAR_ERR_ARGUMENT, e.what());
  }
  return guarded([&] {
    spec.config = config->value;
    spec.output_dir = options->output_dir;
    if (options->kill_rank >= 0) {
      spec.kill = sampar::KillInjection{options->kill_rank, std::chrono::milliseconds(options->kill_after_ms)};
    }
    const sampar::RunOutcome outcome = sampar::run(spec);
    if (summary && capacity > 0) {
      const size_t n = std::min(outcome.message.size(), capacity - 1);
      std::memcpy(summary, outcome.message.data(), n);
      summary[n] = '\0';
    }
    if (outcome.exit_code != SAMPAR_OK) return fail(static_cast<sampar_status>(outcome.exit_code), outcome.message);
    return SAMPAR_OK;
  });
}

sampar_status sampar_model_create(const sampar_config* config, uint64_t seed, sampar_model** out) {
  SAMPAR_REQUIRE(config && out);
  return guarded([&] {
    sampar::ExperimentConfig copy = config->value;
    // Explicit widths need no data; 0 takes them from the configured task.
    if (copy.train.model.input_dim == 0 || copy.train.model.output_dim == 0) sampar::prepare_experiment(copy);
    copy.train.model.validate();
    *out = new sampar_model{sampar::BayesianModel(copy.train.model, seed)};
    return SAMPAR_OK;
  });
}

sampar_status sampar_model_load(const char* path, sampar_model** out) {
  SAMPAR_REQUIRE(path && out);
  return guarded([&] {
    *out = new sampar_model{sampar::load_checkpoint(path)};
    return SAMPAR_OK;
  });
}

sampar_status sampar_model_save(const sampar_model* model, const char* path) {
  SAMPAR_REQUIRE(model && path);
  return guarded([&] {
    sampar::save_checkpoint(model->value, path);
    return SAMPAR_OK;
  });
}

void sampar_model_destroy(sampar_model* model) { delete model; }

size_t sampar_model_input_dim(const sampar_model* model) { return model ? model->value.input_dim() : 0; }
size_t sampar_model_output_dim(const sampar_model* model) { return model ? model->value.output_dim() : 0; }
size_t sampar_model_parameter_count(const sampar_model* model) {
  return model ? model->value.trainable_count() : 0;
}

sampar_status sampar_model_predict(sampar_model* model, const double* x, size_t rows, size_t samples, uint64_t seed,
                                   double* mean, double* stddev) {
  SAMPAR_REQUIRE(model && x && mean && stddev && rows > 0 && samples > 0);
  return guarded([&] {
    const size_t in = model->value.input_dim();
    sampar::Tensor input(sampar::Shape{rows, in}, std::vector<double>(x, x + rows * in));
    const sampar::Predictive p = sampar::mc_predict(model->value, input, samples, sampar::PredictiveSeeds{seed, 0, 0});
    std::memcpy(mean, p.mean.data().data(), p.mean.size() * sizeof(double));
    std::memcpy(stddev, p.stddev.data().data(), p.stddev.size() * sizeof(double));
    return SAMPAR_OK;
  });
}

}  // extern "C"
