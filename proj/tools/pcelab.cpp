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

// pcelab: command-line front end of the pcenet C library.
//
//   pcelab generate --config scenario.json --out dataset.pce
//   pcelab train    --spec spec.json [--out DIR] [--seed S] [--jobs J] [--epochs-scale X]
//   pcelab sweep    --spec spec.json [--train-on-demand] [...]
//   pcelab report   (--spec spec.json | results.csv) [--out DIR]
//   pcelab selftest [--seed S]
//
// Exit codes: 0 success, 2 validation, 3 missing dataset, 4 missing
// checkpoint, 5 malformed CSV, 1 anything else.

#include "pcenet/pcenet.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace
{
    void print_line(const char *msg, void *)
    {
        std::fputs(msg, stdout);
        std::fputc('\n', stdout);
        std::fflush(stdout);
    }

    int exit_code(pce_status s)
    {
        if (s == PCE_OK)
            return 0;
        std::fprintf(stderr, "pcelab: %s\n", pce_last_error());
        switch (s)
        {
        case PCE_ERR_VALIDATION:
        case PCE_ERR_MISSING_DATASET:
        case PCE_ERR_MISSING_CHECKPOINT:
        case PCE_ERR_MALFORMED_CSV:
            return static_cast<int>(s);
        default:
            return 1;
        }
    }

    struct Flags
    {
        std::string config, spec, out, results;
        std::optional<std::uint64_t> seed;
        int jobs = 0;
        std::optional<double> epochs_scale;
        bool train_on_demand = false;
        bool timing = false;

        pce_run_options options() const
        {
            pce_run_options o;
            pce_run_options_init(&o);
            o.out_dir = out.empty() ? nullptr : out.c_str();
            if (seed)
            {
                o.has_seed = 1;
                o.seed = *seed;
            }
            o.jobs = jobs;
            if (epochs_scale)
            {
                o.has_epochs_scale = 1;
                o.epochs_scale = *epochs_scale;
            }
            o.train_on_demand = train_on_demand;
            o.timing = timing;
            o.on_message = print_line;
            return o;
        }
    };

    int run_experiment(const Flags &f, bool sweep)
    {
        pce_run_options o = f.options();
        pce_experiment *exp = nullptr;
        pce_status s = pce_experiment_load(f.spec.c_str(), &o, &exp);
        if (s == PCE_OK)
            s = sweep ? pce_experiment_sweep(exp, &o, nullptr) : pce_experiment_train(exp, &o);
        int code = exit_code(s);
        pce_experiment_free(exp);
        return code;
    }

    int run_report(const Flags &f)
    {
        pce_run_options o = f.options();
        std::string results = f.results, out = f.out;
        if (results.empty())
        {
            if (f.spec.empty())
            {
                std::fprintf(stderr, "pcelab: report needs --spec or a results CSV path\n");
                return 2;
            }
            pce_experiment *exp = nullptr;
            pce_status s = pce_experiment_load(f.spec.c_str(), &o, &exp);
            if (s != PCE_OK)
                return exit_code(s);
            char buf[4096];
            s = pce_experiment_out_dir(exp, buf, sizeof buf);
            pce_experiment_free(exp);
            if (s != PCE_OK)
                return exit_code(s);
            results = (std::filesystem::path(buf) / "results.csv").string();
            if (out.empty())
                out = buf;
        }
        return exit_code(pce_report(results.c_str(), out.empty() ? nullptr : out.c_str(), &o));
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"pcelab: position-domain channel extrapolation experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pce_version());
    Flags f;

    auto *gen = app.add_subcommand("generate", "Generate a channel dataset from a scenario config");
    gen->add_option("--config", f.config, "Scenario JSON")->required();
    gen->add_option("--out", f.out, "Output dataset file (PCE1)")->required();

    auto add_run_flags = [&](CLI::App *sub)
    {
        sub->add_option("--spec", f.spec, "Experiment spec JSON")->required();
        sub->add_option("--out", f.out, "Output directory (overrides the spec)");
        sub->add_option("--seed", f.seed, "Run a single seed");
        sub->add_option("--jobs", f.jobs, "Parallel jobs (capped by PCE_THREADS)")->check(CLI::NonNegativeNumber);
        sub->add_option("--epochs-scale", f.epochs_scale, "Multiply every epoch count")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--timing", f.timing, "Record wall-clock time per row");
    };
    auto *train = app.add_subcommand("train", "Train every variant cell of a spec");
    add_run_flags(train);
    auto *sweep = app.add_subcommand("sweep", "Evaluate trained cells and baselines over the sweep axes");
    add_run_flags(sweep);
    sweep->add_flag("--train-on-demand", f.train_on_demand, "Train missing checkpoints instead of failing");

    auto *report = app.add_subcommand("report", "Aggregate results into per-figure CSVs and acceptance checks");
    report->add_option("results", f.results, "Results CSV (default: <out>/results.csv of --spec)");
    report->add_option("--spec", f.spec, "Experiment spec JSON");
    report->add_option("--out", f.out, "Report directory");

    auto *self = app.add_subcommand("selftest", "Run the numerical oracle suite");
    self->add_option("--seed", f.seed, "Oracle seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 2;
    }

    if (*gen)
    {
        pce_run_options o = f.options();
        o.out_dir = nullptr;
        return exit_code(pce_generate(f.config.c_str(), f.out.c_str(), &o));
    }
    if (*train)
        return run_experiment(f, false);
    if (*sweep)
        return run_experiment(f, true);
    if (*report)
        return run_report(f);

    pce_run_options o = f.options();
    int failures = 0;
    int code = exit_code(pce_selftest(f.seed.value_or(1), &o, &failures));
    if (code != 0)
        return code;
    std::printf("selftest: %d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
