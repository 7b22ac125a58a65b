/*
 * Copyright 2026 The Replica Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the replica library. All handles are opaque; every call
 * returns a replica_status and, on failure, leaves a message retrievable
 * with replica_last_error() on the calling thread. */

#ifndef REPLICA_REPLICA_H_
#define REPLICA_REPLICA_H_

#include <stddef.h>

#if defined(_WIN32)
#define REPLICA_API __declspec(dllexport)
#else
#define REPLICA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum replica_status {
  REPLICA_OK = 0,
  REPLICA_INVALID_ARGUMENT = 1,
  REPLICA_IO_ERROR = 2,
  REPLICA_PARSE_ERROR = 3,
  REPLICA_SCHEMA_ERROR = 4,
  REPLICA_PRECONDITION_FAILED = 5,
  REPLICA_INTERNAL_ERROR = 6
} replica_status;

typedef struct replica_config replica_config;
typedef struct replica_report replica_report;
typedef struct replica_collection replica_collection;

REPLICA_API const char* replica_version(void);
REPLICA_API const char* replica_last_error(void);
REPLICA_API const char* replica_status_name(replica_status status);

/* Configs. */
REPLICA_API replica_status replica_config_load(const char* path,
                                               replica_config** out);
REPLICA_API replica_status replica_config_parse(const char* json,
                                                const char* base_dir,
                                                replica_config** out);
/* Dotted-key override, e.g. ("test.permutations", "99"). */
REPLICA_API replica_status replica_config_set(replica_config* config,
                                              const char* key,
                                              const char* value);
REPLICA_API void replica_config_free(replica_config* config);

/* Commands. A report is produced even when the verdict is negative; its
 * outcome carries 0 or 1. */
REPLICA_API replica_status replica_assess(const replica_config* config,
                                          replica_report** out);
REPLICA_API replica_status replica_test(const replica_config* config,
                                        replica_report** out);
REPLICA_API replica_status replica_resample(const replica_config* config,
                                            replica_report** out);
REPLICA_API replica_status replica_benchmark(const replica_config* config,
                                             replica_report** out);
REPLICA_API replica_status replica_validate(const replica_config* config,
                                            replica_report** out);
REPLICA_API replica_status replica_simulate(const replica_config* config,
                                            replica_report** out);

/* Reports. Returned strings live as long as the report. canonical != 0
 * gives the compact body without timestamp or hash. */
REPLICA_API const char* replica_report_json(const replica_report* report,
                                            int canonical);
REPLICA_API const char* replica_report_text(const replica_report* report);
REPLICA_API const char* replica_report_hash(const replica_report* report);
REPLICA_API int replica_report_outcome(const replica_report* report);
REPLICA_API replica_status replica_report_write(const replica_report* report,
                                                const char* out_dir);
REPLICA_API void replica_report_free(replica_report* report);

/* Collections loaded from a config's study list. */
REPLICA_API replica_status replica_collection_load(const replica_config* config,
                                                   replica_collection** out);
REPLICA_API size_t replica_collection_size(const replica_collection* collection);
REPLICA_API size_t replica_collection_study_size(
    const replica_collection* collection, size_t k);
REPLICA_API const char* replica_collection_study_id(
    const replica_collection* collection, size_t k);
/* Average utility per study under the config's utility and a threshold rule
 * (or the identity rule when threshold is NaN). values must hold
 * replica_collection_size() doubles. */
REPLICA_API replica_status replica_collection_utilities(
    const replica_collection* collection, const replica_config* config,
    double threshold, double* values);
REPLICA_API void replica_collection_free(replica_collection* collection);

/* Binary-joint helpers; cells ordered f00, f01, f10, f11. */
REPLICA_API replica_status replica_tv_distance(const double f[4],
                                              const double g[4], double* out);
REPLICA_API replica_status replica_utility_pseudodistance(const double f[4],
                                                          const double g[4],
                                                          double u01,
                                                          double u10,
                                                          double* out);
REPLICA_API replica_status replica_optimal_threshold(double u01, double u10,
                                                    double prevalence,
                                                    double* out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* REPLICA_REPLICA_H_ */
