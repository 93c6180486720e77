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

/* Compiles the public header as C and drives the library from C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "sampar/sampar.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

int main(void) {
  sampar_config* cfg = NULL;
  sampar_model* model = NULL;
  char buffer[256];
  size_t needed = 0;
  double x[2 * 3] = {0.1, -0.2, 0.3, 1.0, 0.5, -1.5};
  double mean[2 * 2];
  double stddev[2 * 2];
  size_t i;

  EXPECT(strlen(sampar_version()) > 0);
  EXPECT(sampar_config_key_count() > 10);
  EXPECT(sampar_config_key(sampar_config_key_count()) == NULL);

  EXPECT(sampar_config_create(&cfg) == SAMPAR_OK);
  EXPECT(sampar_config_set(cfg, "model.input_dim", "3") == SAMPAR_OK);
  EXPECT(sampar_config_set(cfg, "model.output_dim", "2") == SAMPAR_OK);
  EXPECT(sampar_config_set(cfg, "model.hidden", "8") == SAMPAR_OK);
  EXPECT(sampar_config_get(cfg, "model.hidden", buffer, sizeof buffer, &needed) == SAMPAR_OK);
  EXPECT(strcmp(buffer, "8") == 0);
  EXPECT(needed == 2);
  EXPECT(sampar_config_get(cfg, "model.hidden", buffer, 1, &needed) == SAMPAR_ERR_ARGUMENT);

  EXPECT(sampar_config_set(cfg, "run.bogus", "1") == SAMPAR_ERR_CONFIG);
  EXPECT(strstr(sampar_last_error(), "run.bogus") != NULL);
  EXPECT(sampar_config_set(NULL, "run.samples", "1") == SAMPAR_ERR_ARGUMENT);

  EXPECT(sampar_model_create(cfg, 3, &model) == SAMPAR_OK);
  EXPECT(sampar_model_input_dim(model) == 3);
  EXPECT(sampar_model_output_dim(model) == 2);
  EXPECT(sampar_model_parameter_count(model) == 2 * ((3 * 8 + 8) + (8 * 2 + 2)));
  EXPECT(sampar_model_predict(model, x, 2, 16, 9, mean, stddev) == SAMPAR_OK);
  for (i = 0; i < 4; ++i) {
    EXPECT(isfinite(mean[i]));
    EXPECT(stddev[i] > 0.0);
  }
  EXPECT(sampar_model_predict(model, x, 2, 0, 9, mean, stddev) != SAMPAR_OK);

  sampar_model_destroy(model);
  sampar_config_destroy(cfg);
  sampar_model_destroy(NULL);
  sampar_config_destroy(NULL);

  if (failures) fprintf(stderr, "%d C API checks failed\n", failures);
  return failures ? 1 : 0;
}
