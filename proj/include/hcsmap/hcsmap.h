// Copyright 2026 The hcsmap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HCSMAP_HCSMAP_H_
#define HCSMAP_HCSMAP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(HCSMAP_BUILDING_LIBRARY)
#define HCSMAP_API __attribute__((visibility("default")))
#else
#define HCSMAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hcs_status {
  HCS_OK = 0,
  HCS_ERR_INVALID_ARGUMENT = 1,
  HCS_ERR_CONFIG = 2,
  HCS_ERR_IO = 3,
  HCS_ERR_RUNTIME = 4,
} hcs_status;

typedef struct hcs_pipeline hcs_pipeline;
typedef struct hcs_grid hcs_grid;

// Message of the most recent failure on the calling thread ("" if none).
HCSMAP_API const char* hcs_last_error(void);
HCSMAP_API const char* hcs_version(void);

// Strings returned through char** out-parameters belong to the caller.
HCSMAP_API void hcs_string_free(char* s);

// Pipeline configured from a JSON document. Malformed JSON, unknown keys and
// invalid values return HCS_ERR_CONFIG.
HCSMAP_API hcs_status hcs_pipeline_create(const char* config_json, hcs_pipeline** out);
HCSMAP_API void hcs_pipeline_free(hcs_pipeline* p);
HCSMAP_API hcs_status hcs_pipeline_set_seed(hcs_pipeline* p, uint64_t seed);
HCSMAP_API hcs_status hcs_pipeline_set_threads(hcs_pipeline* p, int threads);
HCSMAP_API hcs_status hcs_pipeline_set_output_dir(hcs_pipeline* p, const char* dir);
// Effective configuration as canonical JSON.
HCSMAP_API hcs_status hcs_pipeline_config(const hcs_pipeline* p, char** config_json);
// Runs one command (synth, train-canopy, predict, composite, train-carbon,
// predict-carbon, classify, stats, eval, grad-check). `summary_json` may be
// NULL. grad-check returns HCS_ERR_RUNTIME when the tolerance is exceeded.
HCSMAP_API hcs_status hcs_pipeline_run(hcs_pipeline* p, const char* command,
                                       char** summary_json);

// Read-only access to GRD1 grids.
HCSMAP_API hcs_status hcs_grid_load(const char* path, hcs_grid** out);
HCSMAP_API void hcs_grid_free(hcs_grid* g);
HCSMAP_API hcs_status hcs_grid_shape(const hcs_grid* g, int* width, int* height,
                                     int* bands);
HCSMAP_API hcs_status hcs_grid_transform(const hcs_grid* g, double* origin_x,
                                         double* origin_y, double* pixel_size);
// `*is_nodata` is set to 1 for masked pixels; `*value` is written either way.
HCSMAP_API hcs_status hcs_grid_value(const hcs_grid* g, int band, int row, int col,
                                     float* value, int* is_nodata);

// HCS class code (0..5) of a carbon density with the default breakpoints.
HCSMAP_API hcs_status hcs_classify_carbon(double density, int* class_code);

// Runs the standard gradient check suite; writes the worst relative error.
HCSMAP_API hcs_status hcs_grad_check(double* max_rel_error);

#ifdef __cplusplus
}
#endif

#endif  // HCSMAP_HCSMAP_H_
