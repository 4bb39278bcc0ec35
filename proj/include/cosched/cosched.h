// Copyright 2026 The cosched Authors.
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

/* C interface to the co-location simulator, the model trainers and the
 * scenario runner. Every call returns a cosched_status; on failure the
 * message is available from cosched_last_error() on the same thread.
 * Strings returned through char** belong to the caller and are released
 * with cosched_string_free(). */

#ifndef COSCHED_COSCHED_H_
#define COSCHED_COSCHED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(COSCHED_BUILDING_LIBRARY)
#define COSCHED_API __attribute__((visibility("default")))
#else
#define COSCHED_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cosched_status {
  COSCHED_OK = 0,
  COSCHED_E_INVALID_ARGUMENT = 1,
  COSCHED_E_CONFIG = 2,
  COSCHED_E_IO = 3,
  COSCHED_E_TRAINING_DIVERGED = 4,
  COSCHED_E_SCENARIO = 5,
  COSCHED_E_INFEASIBLE = 6,
  COSCHED_E_NOT_FOUND = 7,
  COSCHED_E_STRUCTURAL = 8,
  COSCHED_E_INVARIANT = 9,
  COSCHED_E_INTERNAL = 10
} cosched_status;

typedef struct cosched_sim cosched_sim;
typedef struct cosched_models cosched_models;

COSCHED_API const char* cosched_version(void);
/* Message of the last failed call on this thread, "" if none. */
COSCHED_API const char* cosched_last_error(void);
COSCHED_API const char* cosched_status_name(cosched_status status);
COSCHED_API void cosched_string_free(char* s);

/* ---- simulator ---------------------------------------------------------- */

/* Builds a simulator from scenario JSON text. */
COSCHED_API cosched_status cosched_sim_create(const char* scenario_json, cosched_sim** out);
COSCHED_API void cosched_sim_free(cosched_sim* sim);
/* Allocation JSON: {"lc": {id: [cores, ways, bw]}, "be_pool": [c, w, b],
 * "be_members": [ids], "sharing": [{"borrower", "owner", "cores", "ways"}]}.
 * Invalid allocations leave the previous one installed. */
COSCHED_API cosched_status cosched_sim_install(cosched_sim* sim, const char* allocation_json);
/* Advances by dt_ms and returns the snapshot as one telemetry line. */
COSCHED_API cosched_status cosched_sim_step(cosched_sim* sim, double dt_ms, char** tick_json);
COSCHED_API cosched_status cosched_sim_now(const cosched_sim* sim, double* t_ms);

/* ---- normalization, corpus and training ---------------------------------- */

/* Derives the normalization bounds of a preset platform as JSON. */
COSCHED_API cosched_status cosched_normalization_derive(const char* platform, char** json);

/* model is "A" or "B". Writes the corpus CSV to out_path. */
COSCHED_API cosched_status cosched_generate_corpus(const char* platform, const char* model,
                                                   int surfaces, uint64_t seed,
                                                   const char* out_path, int64_t* rows);

/* Trains Model-A or Model-B on a corpus file. epochs <= 0 keeps the default.
 * transfer_from may be NULL or a parameter file of the same model to warm
 * start from. Returns a JSON summary with the held-out metrics. */
COSCHED_API cosched_status cosched_train_model(const char* model, const char* platform,
                                               const char* corpus_path,
                                               const char* transfer_from, int epochs,
                                               uint64_t seed, const char* out_path,
                                               char** summary_json);

/* Trains Model-C with online episodes. transfer_from may be NULL or an agent
 * parameter file to warm start from. Returns one plot series line,
 * {"series": "episode_reward", "scheduler": "cold" or "warm", "x", "y"}. */
COSCHED_API cosched_status cosched_train_agent(const char* platform, int episodes,
                                               uint64_t seed, const char* transfer_from,
                                               const char* out_path, char** history_json);

/* ---- scenario runs -------------------------------------------------------- */

/* Loads the three parameter files for one platform. */
COSCHED_API cosched_status cosched_models_load(const char* platform, const char* model_a_path,
                                               const char* model_b_path,
                                               const char* model_c_path,
                                               cosched_models** out);
COSCHED_API void cosched_models_free(cosched_models* models);

/* Runs a scenario file with "osml+", "heuristic" or "bo". models may be NULL
 * except for osml+. seed 0 keeps the scenario seed. Writes
 * <out_prefix>.decisions.jsonl, <out_prefix>.telemetry.jsonl and
 * <out_prefix>.report.json, and returns the report. A run that does not
 * converge still returns COSCHED_OK; inspect "converged". */
COSCHED_API cosched_status cosched_run(const char* scenario_path, const char* scheduler,
                                       const cosched_models* models, uint64_t seed,
                                       double tick_ms, double cutoff_ms,
                                       const char* out_prefix, char** report_json);

/* Recomputes a report from the telemetry and decision log files alone. A
 * truncated telemetry file yields a report with "truncated": true. */
COSCHED_API cosched_status cosched_report(const char* scenario_path, const char* scheduler,
                                          const char* telemetry_path, const char* log_path,
                                          char** report_json);

/* Reads report JSON files and writes plot series lines to out_path. */
COSCHED_API cosched_status cosched_emit_plots(const char* const* report_paths, size_t count,
                                              const char* out_path);

#ifdef __cplusplus
}
#endif

#endif  /* COSCHED_COSCHED_H_ */
