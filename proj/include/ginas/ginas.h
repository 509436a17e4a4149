// Copyright 2026 The ginas Authors.
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

/* C interface to the ginas gradient inversion library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns a ginas_status; on failure ginas_last_error() holds a
 * message for the calling thread until its next call into the library.
 */
#ifndef GINAS_GINAS_H_
#define GINAS_GINAS_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GINAS_API __declspec(dllexport)
#else
#define GINAS_API __attribute__((visibility("default")))
#endif

typedef enum ginas_status {
  GINAS_OK = 0,
  GINAS_ERR_INVALID_ARGUMENT = 1,
  GINAS_ERR_SHAPE_MISMATCH = 2,
  GINAS_ERR_DOMAIN = 3,
  GINAS_ERR_IO = 4,
  GINAS_ERR_NUMERICAL = 5,
  GINAS_ERR_OUT_OF_RANGE = 6,
  GINAS_ERR_INTERNAL = 99
} ginas_status;

typedef struct ginas_config ginas_config;
typedef struct ginas_report ginas_report;

GINAS_API const char* ginas_version(void);
GINAS_API const char* ginas_status_name(ginas_status status);
GINAS_API const char* ginas_last_error(void);

/* Experiment configuration, a set of string keys with defaults. */
GINAS_API ginas_status ginas_config_create(ginas_config** out);
GINAS_API void ginas_config_destroy(ginas_config* config);
GINAS_API ginas_status ginas_config_set(ginas_config* config, const char* key, const char* value);
/* The returned string lives until the next call on this config. */
GINAS_API ginas_status ginas_config_get(const ginas_config* config, const char* key,
                                        const char** value);
/* Replaces the config with the config.* lines of a report file. */
GINAS_API ginas_status ginas_config_load_report(ginas_config* config, const char* path);

GINAS_API size_t ginas_config_key_count(void);
GINAS_API const char* ginas_config_key_name(size_t index);
GINAS_API const char* ginas_config_key_help(size_t index);

/* Pipelines. On a stage failure *out is still set (its error.* entries name
 * the stage) and the stage's status is returned. */
GINAS_API ginas_status ginas_run_attack(const ginas_config* config, ginas_report** out);
GINAS_API ginas_status ginas_run_search_diag(const ginas_config* config, ginas_report** out);
GINAS_API ginas_status ginas_run_gradcheck(uint64_t seed, int instances, ginas_report** out);

/* Reports: ordered key=value entries. */
GINAS_API void ginas_report_destroy(ginas_report* report);
GINAS_API size_t ginas_report_size(const ginas_report* report);
GINAS_API const char* ginas_report_key(const ginas_report* report, size_t index);
GINAS_API const char* ginas_report_value(const ginas_report* report, size_t index);
/* NULL when the key is absent. */
GINAS_API const char* ginas_report_get(const ginas_report* report, const char* key);
GINAS_API ginas_status ginas_report_get_double(const ginas_report* report, const char* key,
                                               double* value);
/* The whole report as key=value lines; lives as long as the report. */
GINAS_API const char* ginas_report_text(const ginas_report* report);

#ifdef __cplusplus
}
#endif

#endif /* GINAS_GINAS_H_ */
