/* Copyright 2026 The mpipsim Authors
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

/* C interface to the MPIP simulator. All handles are opaque. Functions
 * return an mpip_status; on failure mpip_last_error() describes the problem
 * for the calling thread. */

#ifndef MPIP_MPIP_H
#define MPIP_MPIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MPIP_API __declspec(dllexport)
#else
#define MPIP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mpip_status {
  MPIP_OK = 0,
  MPIP_ERR_INVALID_ARGUMENT = 1,
  MPIP_ERR_PARSE = 2,
  MPIP_ERR_IO = 3,
  MPIP_ERR_NOT_FOUND = 4,
  MPIP_ERR_CODEC = 5,
  MPIP_ERR_INTERNAL = 6
} mpip_status;

typedef struct mpip_scenario mpip_scenario;
typedef struct mpip_run mpip_run;

MPIP_API const char* mpip_version(void);
MPIP_API const char* mpip_last_error(void);

MPIP_API mpip_status mpip_scenario_parse(const char* text, mpip_scenario** out);
MPIP_API mpip_status mpip_scenario_load_file(const char* path, mpip_scenario** out);
MPIP_API mpip_status mpip_scenario_load_canned(const char* name, mpip_scenario** out);
MPIP_API void mpip_scenario_free(mpip_scenario* scn);

MPIP_API size_t mpip_canned_count(void);
/* Returns NULL when index is out of range. */
MPIP_API const char* mpip_canned_name(size_t index);

/* Runs the scenario. When has_seed is zero the scenario's own seed is used. */
MPIP_API mpip_status mpip_run_scenario(const mpip_scenario* scn, int has_seed, uint64_t seed,
                                       mpip_run** out);
/* Writes metrics.csv and events.csv into dir. */
MPIP_API mpip_status mpip_run_write_csv(const mpip_run* run, const char* dir);
/* The string outputs below are released with mpip_string_free. */
MPIP_API mpip_status mpip_run_metrics_csv(const mpip_run* run, char** out);
MPIP_API mpip_status mpip_run_events_csv(const mpip_run* run, char** out);
/* JSON object with per-flow and per-node totals. */
MPIP_API mpip_status mpip_run_summary(const mpip_run* run, char** out);
MPIP_API void mpip_run_free(mpip_run* run);
MPIP_API void mpip_string_free(char* s);

typedef struct mpip_cm {
  uint8_t version;
  uint8_t flags;
  uint64_t node_id; /* low 48 bits */
  uint16_t session_id;
  uint8_t path_id;
  uint8_t feedback_path_id;
  uint32_t timestamp_ms;
  int32_t path_delay_ms;
  uint8_t addr_count;
  uint32_t addr_slot;
} mpip_cm;

#define MPIP_CM_SIZE 25

MPIP_API mpip_status mpip_cm_encode(const mpip_cm* cm, uint8_t out[MPIP_CM_SIZE]);
/* Decodes the last MPIP_CM_SIZE bytes of buf. */
MPIP_API mpip_status mpip_cm_decode(const uint8_t* buf, size_t len, mpip_cm* out);

#ifdef __cplusplus
}
#endif

#endif /* MPIP_MPIP_H */
