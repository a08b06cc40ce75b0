/*
 * Copyright 2026 The shapeopt authors
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
 *
 * C API of the shape optimization toolkit. All entry points return a
 * status code; SOPT_OK is 0. Error messages are written into the caller's
 * buffer. Handles are opaque and must be released with sopt_run_destroy.
 */
#ifndef SHAPEOPT_C_H
#define SHAPEOPT_C_H

#ifdef __cplusplus
extern "C" {
#endif

enum sopt_status {
  SOPT_OK = 0,
  SOPT_ERR_PARSE = 1,    /* config syntax/validation error */
  SOPT_ERR_RUNTIME = 2,  /* solver or I/O failure */
  SOPT_ERR_CHECK = 3,    /* verification checks failed */
  SOPT_ERR_USAGE = 4     /* invalid arguments to the API itself */
};

typedef struct sopt_run sopt_run;

const char* sopt_version(void);

/* Parses and validates a config file (INI-style text or JSON). */
int sopt_run_create(const char* config_path, sopt_run** out, char* errmsg, int errmsg_len);

/* Same, from an in-memory config string. */
int sopt_run_create_from_string(const char* config_text, sopt_run** out, char* errmsg,
                                int errmsg_len);

/* Executes the configured optimizer and writes history.csv, summary.json,
 * and final_surface.csv (plus piggyback_residuals.csv for One Shot runs)
 * into the configured output directory. */
int sopt_run_execute(sopt_run* run, char* errmsg, int errmsg_len);

/* Accessors; valid after a successful sopt_run_execute. */
int sopt_run_output_dir(const sopt_run* run, char* buf, int buf_len);
int sopt_run_final_objective(const sopt_run* run, double* out);
int sopt_run_iterations(const sopt_run* run, int* out);

void sopt_run_destroy(sopt_run* run);

/* Runs the verification suite at the given level (one of "gradient",
 * "hessian", "operators", "all") with random vectors drawn from seed.
 * Writes a text report to report_path when non-NULL. Returns SOPT_OK when
 * every check passed and SOPT_ERR_CHECK otherwise. */
int sopt_verify(const char* level, unsigned long long seed, const char* report_path, char* errmsg,
                int errmsg_len);

/* Builds the comparison table over history CSV files and writes it as CSV
 * and aligned text (either output path may be NULL). Retardation factors
 * are computed against the given baseline single-solve cost. */
int sopt_report(const char* const* history_paths, int n_paths, double baseline_time_s,
                long baseline_iters, const char* out_csv, const char* out_text, char* errmsg,
                int errmsg_len);

#ifdef __cplusplus
}
#endif

#endif /* SHAPEOPT_C_H */
