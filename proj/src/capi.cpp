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

#include "pcenet/pcenet.h"

#include "pcenet/experiment.hpp"
#include "pcenet/oracles.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

struct pce_dataset
{
    pce::Dataset ds;
};

struct pce_experiment
{
    pce::ExperimentSpec spec;
};

struct pce_bundle
{
    pce::PipelineBundle bundle;
};

namespace
{
    thread_local std::string g_last_error;

    pce_status fail(pce_status s, const std::string &msg)
    {
        g_last_error = msg;
        return s;
    }

    // Translates the exception in flight into a status code.
    pce_status translate()
    {
        try
        {
            throw;
        }
        catch (const pce::MissingDatasetError &e)
        {
            return fail(PCE_ERR_MISSING_DATASET, e.what());
        }
        catch (const pce::MissingCheckpointError &e)
        {
            return fail(PCE_ERR_MISSING_CHECKPOINT, e.what());
        }
        catch (const pce::CsvError &e)
        {
            return fail(PCE_ERR_MALFORMED_CSV, e.what());
        }
        catch (const pce::FormatError &e)
        {
            return fail(PCE_ERR_FORMAT, e.what());
        }
        catch (const pce::IoError &e)
        {
            return fail(PCE_ERR_IO, e.what());
        }
        catch (const pce::NumericError &e)
        {
            return fail(PCE_ERR_NUMERIC, e.what());
        }
        catch (const pce::StateError &e)
        {
            return fail(PCE_ERR_STATE, e.what());
        }
        catch (const std::invalid_argument &e)
        {
            return fail(PCE_ERR_VALIDATION, e.what());
        }
        catch (const std::exception &e)
        {
            return fail(PCE_ERR_INTERNAL, e.what());
        }
        catch (...)
        {
            return fail(PCE_ERR_INTERNAL, "unknown error");
        }
    }

    template <class F> pce_status guarded(F &&f)
    {
        g_last_error.clear();
        try
        {
            f();
            return PCE_OK;
        }
        catch (...)
        {
            return translate();
        }
    }

    pce::RunOptions to_options(const pce_run_options *o)
    {
        pce::RunOptions r;
        if (!o)
            return r;
        if (o->out_dir)
            r.out_dir = o->out_dir;
        if (o->has_seed)
            r.seed = o->seed;
        r.jobs = o->jobs;
        if (o->has_epochs_scale)
            r.epochs_scale = o->epochs_scale;
        r.train_on_demand = o->train_on_demand != 0;
        r.timing = o->timing != 0;
        if (o->on_message)
        {
            pce_message_fn fn = o->on_message;
            void *user = o->user;
            r.print = [fn, user](const std::string &m) { fn(m.c_str(), user); };
        }
        return r;
    }

    void require(const void *p, const char *what)
    {
        if (!p)
            throw std::invalid_argument(std::string(what) + " must not be NULL");
    }

    std::optional<double> snr_arg(double snr_db)
    {
        if (std::isnan(snr_db))
            return std::nullopt;
        return snr_db;
    }
}

extern "C"
{
    const char *pce_version(void) { return "1.0.0"; }

    const char *pce_last_error(void) { return g_last_error.c_str(); }

    void pce_run_options_init(pce_run_options *opts)
    {
        if (opts)
            std::memset(opts, 0, sizeof *opts);
    }

    void pce_set_warning_handler(pce_message_fn fn, void *user)
    {
        if (!fn)
            pce::set_warning_sink(nullptr);
        else
            pce::set_warning_sink([fn, user](const std::string &m) { fn(m.c_str(), user); });
    }

    pce_status pce_generate(const char *scenario_path, const char *out_path, const pce_run_options *opts)
    {
        return guarded(
            [&]
            {
                require(scenario_path, "scenario_path");
                require(out_path, "out_path");
                pce::cmd_generate(scenario_path, out_path, to_options(opts));
            });
    }

    pce_status pce_dataset_load(const char *path, pce_dataset **out)
    {
        return guarded(
            [&]
            {
                require(path, "path");
                require(out, "out");
                *out = nullptr;
                if (!std::filesystem::exists(path))
                    throw pce::MissingDatasetError(std::string("dataset '") + path + "' does not exist");
                auto h = std::make_unique<pce_dataset>();
                h->ds = pce::load_dataset(path);
                *out = h.release();
            });
    }

    void pce_dataset_free(pce_dataset *ds) { delete ds; }

    pce_status pce_dataset_get_info(const pce_dataset *ds, pce_dataset_info *info)
    {
        return guarded(
            [&]
            {
                require(ds, "dataset");
                require(info, "info");
                info->antennas = ds->ds.antennas;
                info->samples = ds->ds.samples.size();
                info->train = ds->ds.count(pce::Split::train);
                info->val = ds->ds.count(pce::Split::val);
                info->test = ds->ds.count(pce::Split::test);
                info->norm_scale = ds->ds.norm_scale;
            });
    }

    pce_status pce_dataset_sample(const pce_dataset *ds, size_t index, float position[2], float *h_main,
                                  float *h_side, pce_split *split)
    {
        return guarded(
            [&]
            {
                require(ds, "dataset");
                if (index >= ds->ds.samples.size())
                    throw std::invalid_argument("sample index " + std::to_string(index) + " out of range");
                const auto &s = ds->ds.samples[index];
                if (position)
                {
                    position[0] = s.position[0];
                    position[1] = s.position[1];
                }
                auto copy = [](const std::vector<std::complex<float>> &h, float *dst)
                {
                    for (std::size_t k = 0; dst && k < h.size(); ++k)
                    {
                        dst[2 * k] = h[k].real();
                        dst[2 * k + 1] = h[k].imag();
                    }
                };
                copy(s.h_main, h_main);
                copy(s.h_side, h_side);
                if (split)
                    *split = static_cast<pce_split>(ds->ds.split[index]);
            });
    }

    pce_status pce_experiment_load(const char *spec_path, const pce_run_options *opts, pce_experiment **out)
    {
        return guarded(
            [&]
            {
                require(spec_path, "spec_path");
                require(out, "out");
                *out = nullptr;
                auto h = std::make_unique<pce_experiment>();
                h->spec = pce::load_spec(spec_path);
                pce::apply_overrides(h->spec, to_options(opts));
                *out = h.release();
            });
    }

    void pce_experiment_free(pce_experiment *exp) { delete exp; }

    pce_status pce_experiment_out_dir(const pce_experiment *exp, char *buf, size_t len)
    {
        return guarded(
            [&]
            {
                require(exp, "experiment");
                require(buf, "buf");
                const std::string &s = exp->spec.out_dir;
                if (s.size() + 1 > len)
                    throw std::invalid_argument("buffer too small for the output directory");
                std::memcpy(buf, s.c_str(), s.size() + 1);
            });
    }

    pce_status pce_experiment_train(pce_experiment *exp, const pce_run_options *opts)
    {
        return guarded(
            [&]
            {
                require(exp, "experiment");
                pce::cmd_train(exp->spec, to_options(opts));
            });
    }

    pce_status pce_experiment_sweep(pce_experiment *exp, const pce_run_options *opts, size_t *rows)
    {
        return guarded(
            [&]
            {
                require(exp, "experiment");
                auto r = pce::cmd_sweep(exp->spec, to_options(opts));
                if (rows)
                    *rows = r.size();
            });
    }

    pce_status pce_report(const char *results_csv, const char *out_dir, const pce_run_options *opts)
    {
        return guarded(
            [&]
            {
                require(results_csv, "results_csv");
                std::string dir = out_dir ? std::string(out_dir)
                                          : std::filesystem::path(results_csv).parent_path().string();
                pce::cmd_report(results_csv, dir.empty() ? "." : dir, to_options(opts));
            });
    }

    pce_status pce_selftest(uint64_t seed, const pce_run_options *opts, int *failures)
    {
        return guarded(
            [&]
            {
                pce::RunOptions o = to_options(opts);
                int failed = 0;
                for (const auto &r : pce::run_selftest(seed))
                {
                    failed += !r.pass;
                    if (o.print)
                    {
                        char t[32];
                        std::snprintf(t, sizeof t, "%.2f", r.seconds);
                        o.print("[C" + std::to_string(r.criterion) + "] " + (r.pass ? "PASS " : "FAIL ") + r.name +
                                " (" + t + " s): " + r.detail);
                    }
                }
                if (failures)
                    *failures = failed;
            });
    }

    pce_status pce_bundle_load(const char *dir, pce_bundle **out)
    {
        return guarded(
            [&]
            {
                require(dir, "dir");
                require(out, "out");
                *out = nullptr;
                if (!std::filesystem::exists(std::filesystem::path(dir) / "manifest.json"))
                    throw pce::MissingCheckpointError(std::string("no bundle manifest in '") + dir + "'");
                auto h = std::make_unique<pce_bundle>();
                h->bundle = pce::load_bundle(dir);
                *out = h.release();
            });
    }

    void pce_bundle_free(pce_bundle *b) { delete b; }

    pce_status pce_bundle_infer(const pce_bundle *b, const pce_dataset *ds, size_t index, double snr_db,
                                uint64_t seed, double position[2], double *side_hat, size_t len)
    {
        return guarded(
            [&]
            {
                require(b, "bundle");
                require(ds, "dataset");
                if (index >= ds->ds.samples.size())
                    throw std::invalid_argument("sample index " + std::to_string(index) + " out of range");
                pce::InferenceResult r = pce::run_inference(b->bundle, ds->ds.samples[index], snr_arg(snr_db), seed);
                if (position)
                {
                    position[0] = r.position.x;
                    position[1] = r.position.y;
                }
                if (side_hat)
                {
                    if (len < 2 * r.side_hat.size())
                        throw std::invalid_argument("side_hat capacity " + std::to_string(len) + " < 2N = " +
                                                    std::to_string(2 * r.side_hat.size()));
                    for (std::size_t k = 0; k < r.side_hat.size(); ++k)
                    {
                        side_hat[2 * k] = r.side_hat[k].real();
                        side_hat[2 * k + 1] = r.side_hat[k].imag();
                    }
                }
            });
    }

    pce_status pce_bundle_evaluate(const pce_bundle *b, const pce_dataset *ds, pce_split split, double snr_db,
                                   uint64_t seed, double *side_nmse_db, double *loc_mean_err_m)
    {
        return guarded(
            [&]
            {
                require(b, "bundle");
                require(ds, "dataset");
                if (split < PCE_SPLIT_TRAIN || split > PCE_SPLIT_TEST)
                    throw std::invalid_argument("unknown split");
                auto ev = pce::evaluate_pcenet(b->bundle, ds->ds, static_cast<pce::Split>(split), snr_arg(snr_db),
                                               seed);
                if (side_nmse_db)
                    *side_nmse_db = ev.side.db;
                if (loc_mean_err_m)
                    *loc_mean_err_m = ev.localization ? ev.localization->mean : std::nan("");
            });
    }
}
