// SPDX-License-Identifier: Apache-2.0
//
// pcenet: position-domain channel extrapolation laboratory
// Copyright (C) 2026 pcenet developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PCENET_PCENET_H
#define PCENET_PCENET_H

/* C interface of the pcenet library. Objects are opaque handles released
 * with their *_free function; every call returns a pce_status and leaves a
 * message for pce_last_error() on failure. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCE_API __declspec(dllexport)
#else
#define PCE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pce_status
{
    PCE_OK = 0,
    PCE_ERR_INTERNAL = 1,
    PCE_ERR_VALIDATION = 2,         /* invalid config, spec or argument */
    PCE_ERR_MISSING_DATASET = 3,
    PCE_ERR_MISSING_CHECKPOINT = 4,
    PCE_ERR_MALFORMED_CSV = 5,
    PCE_ERR_IO = 6,
    PCE_ERR_FORMAT = 7,             /* corrupt dataset or checkpoint file */
    PCE_ERR_NUMERIC = 8,            /* NaN/Inf or singular system */
    PCE_ERR_STATE = 9               /* pipeline stage not trained */
} pce_status;

typedef struct pce_dataset pce_dataset;
typedef struct pce_experiment pce_experiment;
typedef struct pce_bundle pce_bundle;

typedef void (*pce_message_fn)(const char *message, void *user);

typedef struct pce_run_options
{
    const char *out_dir;    /* NULL keeps the spec's output directory */
    int has_seed;           /* nonzero: run only `seed` */
    uint64_t seed;
    int jobs;               /* 0: hardware threads; PCE_THREADS caps either */
    int has_epochs_scale;
    double epochs_scale;
    int train_on_demand;    /* sweep trains missing checkpoints */
    int timing;             /* record wall_time_s (nonzero makes CSVs run-dependent) */
    pce_message_fn on_message;
    void *user;
} pce_run_options;

typedef struct pce_dataset_info
{
    int antennas;
    size_t samples;
    size_t train, val, test;
    double norm_scale;
} pce_dataset_info;

typedef enum pce_split
{
    PCE_SPLIT_TRAIN = 0,
    PCE_SPLIT_VAL = 1,
    PCE_SPLIT_TEST = 2
} pce_split;

PCE_API const char *pce_version(void);
/* Message of the last failed call on this thread ("" if none). */
PCE_API const char *pce_last_error(void);
PCE_API void pce_run_options_init(pce_run_options *opts);
/* Routes library warnings to `fn` (NULL restores stderr). */
PCE_API void pce_set_warning_handler(pce_message_fn fn, void *user);

/* Scenario JSON -> PCE1 dataset file. */
PCE_API pce_status pce_generate(const char *scenario_path, const char *out_path, const pce_run_options *opts);

PCE_API pce_status pce_dataset_load(const char *path, pce_dataset **out);
PCE_API void pce_dataset_free(pce_dataset *ds);
PCE_API pce_status pce_dataset_get_info(const pce_dataset *ds, pce_dataset_info *info);
/* Copies sample `index`: position (2), channels as interleaved re/im (2N
 * floats each, either may be NULL) and its split. */
PCE_API pce_status pce_dataset_sample(const pce_dataset *ds, size_t index, float position[2], float *h_main,
                                      float *h_side, pce_split *split);

/* Loads and validates an experiment spec; `opts` overrides apply. */
PCE_API pce_status pce_experiment_load(const char *spec_path, const pce_run_options *opts, pce_experiment **out);
PCE_API void pce_experiment_free(pce_experiment *exp);
PCE_API pce_status pce_experiment_out_dir(const pce_experiment *exp, char *buf, size_t len);
PCE_API pce_status pce_experiment_train(pce_experiment *exp, const pce_run_options *opts);
/* Writes results.csv, loc_errors.csv and meta.json; `rows` may be NULL. */
PCE_API pce_status pce_experiment_sweep(pce_experiment *exp, const pce_run_options *opts, size_t *rows);

/* Aggregates a results CSV into per-figure CSVs and summary.txt in `out_dir`. */
PCE_API pce_status pce_report(const char *results_csv, const char *out_dir, const pce_run_options *opts);

/* Runs the oracle suite; `failures` receives the number of failed checks. */
PCE_API pce_status pce_selftest(uint64_t seed, const pce_run_options *opts, int *failures);

PCE_API pce_status pce_bundle_load(const char *dir, pce_bundle **out);
PCE_API void pce_bundle_free(pce_bundle *b);
/* Deployment pass for one sample. `snr_db` NaN = noiseless. Writes the
 * position (meters, or the latent in label-free mode) and the side channel
 * estimate as interleaved re/im into `side_hat` (capacity `len` >= 2N). */
PCE_API pce_status pce_bundle_infer(const pce_bundle *b, const pce_dataset *ds, size_t index, double snr_db,
                                    uint64_t seed, double position[2], double *side_hat, size_t len);
/* Side-channel NMSE over a split; `loc_mean_err_m` is NaN without a localizer. */
PCE_API pce_status pce_bundle_evaluate(const pce_bundle *b, const pce_dataset *ds, pce_split split, double snr_db,
                                       uint64_t seed, double *side_nmse_db, double *loc_mean_err_m);

#ifdef __cplusplus
}
#endif

#endif
