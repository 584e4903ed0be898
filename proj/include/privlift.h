/* Copyright 2026 The privlift Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the privlift library: private randomized-trial lift measurement
 * between a publisher and an advertiser. All functions return a status code
 * (PRIVLIFT_OK on success); the failure message for the current thread is
 * available from privlift_last_error() until the next call on that thread.
 *
 * Handles are opaque and single-threaded; strings returned through `char**`
 * are heap-allocated and must be released with privlift_string_free().
 */

#ifndef PRIVLIFT_H_
#define PRIVLIFT_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values double as process exit codes in the CLI. */
#define PRIVLIFT_OK 0
#define PRIVLIFT_ERR_BAD_INPUT 1
#define PRIVLIFT_ERR_IO 2
#define PRIVLIFT_ERR_CHANNEL_CLOSED 3
#define PRIVLIFT_ERR_MALFORMED_MESSAGE 4
#define PRIVLIFT_ERR_PEER_ABORT 5
#define PRIVLIFT_ERR_HELLO_MISMATCH 6
#define PRIVLIFT_ERR_SPINE_DIVERGENCE 7
#define PRIVLIFT_ERR_BINDING_MISMATCH 8
#define PRIVLIFT_ERR_DECODE_FAILURE 9
#define PRIVLIFT_ERR_TRANSCRIPT_MISMATCH 10
#define PRIVLIFT_ERR_PREFLIGHT_FAILED 11
#define PRIVLIFT_ERR_COVERT_CHECK_FAILED 12
#define PRIVLIFT_ERR_INTERNAL 13

typedef struct privlift_config privlift_config;
typedef struct privlift_report privlift_report;

/* Library version, e.g. "1.0.0". Static storage; do not free. */
const char* privlift_version(void);

/* Message of the last failed call on this thread; "" if none. Static
 * thread-local storage; do not free. */
const char* privlift_last_error(void);

void privlift_string_free(char* s);

/* ---- configuration ----
 *
 * A config is a flat JSON object. Protocol keys (hash-checked between the
 * parties at HELLO): shards, workers, max_conversions, r_bound, rho1, rho2,
 * alpha, noise_k, zero_noise. Local keys: seed, input_csv, out_report, host,
 * port. Missing keys take defaults; unknown keys are rejected. */
int privlift_config_parse(const char* json_text, privlift_config** out);
int privlift_config_load_file(const char* path, privlift_config** out);
int privlift_config_default(privlift_config** out);

/* Typed single-key overrides, applied after parse (CLI flags use these).
 * Keys match the JSON names; range errors surface on the next run call. */
int privlift_config_set_u64(privlift_config* cfg, const char* key,
                            uint64_t value);
int privlift_config_set_f64(privlift_config* cfg, const char* key,
                            double value);
int privlift_config_set_bool(privlift_config* cfg, const char* key, int value);
int privlift_config_set_str(privlift_config* cfg, const char* key,
                            const char* value);

/* Serializes the effective config back to JSON. */
int privlift_config_dump(const privlift_config* cfg, char** out_json);
void privlift_config_free(privlift_config* cfg);

/* ---- reports ---- */
int privlift_report_json(const privlift_report* rep, char** out_json);
/* Numeric field access: dp_lift, dp_se, ci_lower, ci_upper, n_t, n_c,
 * spine_rows. Integers are widened to double. */
int privlift_report_get(const privlift_report* rep, const char* field,
                        double* out);
void privlift_report_free(privlift_report* rep);

/* ---- commands ---- */

/* Synthesizes a linked publisher/advertiser dataset with a planted lift and
 * writes both CSVs plus `<publisher_csv>.meta.json`. out_meta_json (optional,
 * may be NULL) receives the metadata JSON. */
int privlift_synth(uint64_t users, double overlap, double true_lift,
                   uint64_t seed, uint64_t r_bound, const char* publisher_csv,
                   const char* advertiser_csv, char** out_meta_json);

/* Plaintext reference run over both files in one process: same estimator and
 * noise shape as the two-party pipeline, no cryptography. `role` in the
 * report reads "oracle". */
int privlift_oracle(const privlift_config* cfg, const char* publisher_csv,
                    const char* advertiser_csv, privlift_report** out);

/* Identity join only, over TCP (role is "publisher" or "advertiser"; the
 * publisher dials host:port, the advertiser listens on port). out_json
 * receives the match summary. */
int privlift_match(const privlift_config* cfg, const char* role,
                   char** out_json);

/* Full two-party pipeline over TCP, one role per process. Blocks until the
 * run completes or fails; the report is returned (and written to out_report
 * if configured) only on full mutual success. */
int privlift_run(const privlift_config* cfg, const char* role,
                 privlift_report** out);

/* Both parties in one process over in-memory channels. Intended for tests
 * and demos; either output pointer may be NULL. */
int privlift_run_local(const privlift_config* publisher_cfg,
                       const privlift_config* advertiser_cfg,
                       privlift_report** publisher_out,
                       privlift_report** advertiser_out);

/* Benchmark sweep: synthesizes one dataset (users/overlap/true_lift/seed),
 * then runs the in-process pipeline once per case. `sweep` is a comma list
 * of SHARDSxWORKERS entries, e.g. "1x1,4x1,4x4" ("4" alone means "4x1").
 * out_csv receives a timing table. */
int privlift_bench(const privlift_config* base_cfg, const char* sweep,
                   uint64_t users, double overlap, double true_lift,
                   uint64_t seed, char** out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PRIVLIFT_H_ */
