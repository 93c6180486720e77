/*
 * Copyright (c) 2026 The sampar Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SAMPAR_SAMPAR_H_
#define SAMPAR_SAMPAR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SAMPAR_BUILDING_LIBRARY)
#define SAMPAR_API __attribute__((visibility("default")))
#else
#define SAMPAR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first five double as process exit codes. */
typedef enum sampar_status {
  SAMPAR_OK = 0,
  SAMPAR_ERR_FAILURE = 1,   /* I/O, parse or internal error */
  SAMPAR_ERR_CONFIG = 2,    /* invalid configuration; message names the invariant */
  SAMPAR_ERR_TRANSPORT = 3, /* worker lost, timeout or desync */
  SAMPAR_ERR_NUMERIC = 4,   /* non-finite loss or gradient */
  SAMPAR_ERR_ARGUMENT = 5,  /* null handle, bad argument or buffer too small */
} sampar_status;

typedef struct sampar_config sampar_config;
typedef struct sampar_model sampar_model;

/* Engine version string (git describe of the build). */
SAMPAR_API const char* sampar_version(void);

/* Message of the last failed call on this thread, or "". */
SAMPAR_API const char* sampar_last_error(void);

/* Strings are copied into caller buffers. *needed (if non-null) receives the
 * length including the terminator; a short buffer yields SAMPAR_ERR_ARGUMENT.
 * A null buffer with a non-null `needed` only queries the size. */

SAMPAR_API sampar_status sampar_config_create(sampar_config** out);
SAMPAR_API sampar_status sampar_config_load(const char* path, sampar_config** out);
SAMPAR_API sampar_status sampar_config_parse(const char* ini_text, sampar_config** out);
SAMPAR_API void sampar_config_destroy(sampar_config* config);

/* Keys are "section.name", e.g. "run.samples" or "model.hidden". */
SAMPAR_API sampar_status sampar_config_set(sampar_config* config, const char* key, const char* value);
SAMPAR_API sampar_status sampar_config_get(const sampar_config* config, const char* key, char* buffer,
                                           size_t capacity, size_t* needed);
SAMPAR_API size_t sampar_config_key_count(void);
SAMPAR_API const char* sampar_config_key(size_t index);

/* Full configuration as INI text. */
SAMPAR_API sampar_status sampar_config_to_ini(const sampar_config* config, char* buffer, size_t capacity,
                                              size_t* needed);

/* Resolves data-dependent fields and checks every invariant. */
SAMPAR_API sampar_status sampar_config_validate(const sampar_config* config);

typedef struct sampar_run_options {
  const char* output_dir; /* required */
  int kill_rank;          /* fault injection on socket runs; -1 disables */
  int kill_after_ms;
} sampar_run_options;

SAMPAR_API void sampar_run_options_init(sampar_run_options* options);

/* Runs "train", "bench-fixed", "bench-proportional" or "verify". The return
 * value is the process exit code of the run. `summary` (optional) receives a
 * one-line result, or the check report for verify. */
SAMPAR_API sampar_status sampar_run(const sampar_config* config, const char* subcommand,
                                    const sampar_run_options* options, char* summary, size_t capacity);

/* Widths left at 0 in the config are resolved from its data task. */
SAMPAR_API sampar_status sampar_model_create(const sampar_config* config, uint64_t seed, sampar_model** out);
SAMPAR_API sampar_status sampar_model_load(const char* path, sampar_model** out);
SAMPAR_API sampar_status sampar_model_save(const sampar_model* model, const char* path);
SAMPAR_API void sampar_model_destroy(sampar_model* model);

SAMPAR_API size_t sampar_model_input_dim(const sampar_model* model);
SAMPAR_API size_t sampar_model_output_dim(const sampar_model* model);
SAMPAR_API size_t sampar_model_parameter_count(const sampar_model* model);

/* Predictive mean and std over `samples` stochastic passes. x is row-major
 * [rows x input_dim]; mean and stddev are [rows x output_dim]. */
SAMPAR_API sampar_status sampar_model_predict(sampar_model* model, const double* x, size_t rows, size_t samples,
                                              uint64_t seed, double* mean, double* stddev);

#ifdef __cplusplus
}
#endif

#endif  // SAMPAR_SAMPAR_H_
