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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits 0 only
// when every criterion passes.
//
//   pce_acceptance [--work DIR] [--jobs N] [--epochs-scale S] [--only LIST]

#include "pcenet/experiment.hpp"
#include "pcenet/oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace pce;

namespace
{
    // Runtime limits in seconds.
    constexpr double kGradientBudgetS = 30.0;
    constexpr double kComplexBudgetS = 10.0;
    constexpr double kQuantizerBudgetS = 10.0;
    constexpr double kPlateauBudgetS = 20.0 * 60.0;
    constexpr double kVariantBudgetS = 30.0 * 60.0;

    using Clock = std::chrono::steady_clock;

    double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    std::string read_file(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    struct Line
    {
        int criterion;
        bool pass;
        std::string detail;
        double seconds;
    };

    void print(const Line &l)
    {
        std::printf("[C%d] %s %s (%.1f s)\n", l.criterion, l.pass ? "PASS" : "FAIL", l.detail.c_str(), l.seconds);
        std::fflush(stdout);
    }

    RunOptions quiet(int jobs)
    {
        RunOptions o;
        o.jobs = jobs;
        o.print = [](const std::string &m) { std::fprintf(stderr, "  %s\n", m.c_str()); };
        return o;
    }

    // Loads a spec and redirects its dataset and outputs into the work tree.
    ExperimentSpec desk_spec(const std::string &name, const fs::path &out, const fs::path &dataset, double scale)
    {
        ExperimentSpec s = load_spec((fs::path(PCE_CONFIG_DIR) / name).string());
        s.out_dir = out.string();
        s.dataset_path = dataset.string();
        s.epochs_scale = scale;
        s.validate();
        return s;
    }

    struct Phase
    {
        std::vector<ResultRecord> rows;
        double seconds = 0.0;
    };

    Phase run_phase(const ExperimentSpec &spec, int jobs)
    {
        auto t0 = Clock::now();
        fs::remove_all(spec.out_dir);
        fs::create_directories(spec.out_dir);
        cmd_train(spec, quiet(jobs));
        Phase p;
        p.rows = cmd_sweep(spec, quiet(jobs));
        p.seconds = since(t0);
        return p;
    }

    // generate -> train -> sweep -> report into `dir`; returns every CSV and
    // the dataset keyed by relative path.
    std::map<std::string, std::string> full_run(const fs::path &dir, int jobs)
    {
        fs::remove_all(dir);
        ExperimentSpec s = load_spec((fs::path(PCE_CONFIG_DIR) / "tiny_spec.json").string());
        s.out_dir = dir.string();
        s.dataset_path = (dir / "dataset.pce").string();
        RunOptions o = quiet(jobs);
        cmd_generate(s.scenario_path, s.dataset_path, o);
        cmd_train(s, o);
        cmd_sweep(s, o);
        cmd_report((dir / "results.csv").string(), dir.string(), o);
        std::map<std::string, std::string> files;
        for (const auto &e : fs::recursive_directory_iterator(dir))
            if (e.is_regular_file() && (e.path().extension() == ".csv" || e.path().extension() == ".pce"))
                files[fs::relative(e.path(), dir).string()] = read_file(e.path());
        return files;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"pcenet acceptance suite"};
    std::string work = PCE_ACCEPT_WORK;
    int jobs = 0;
    double scale = 1.0;
    std::vector<int> only;
    app.add_option("--work", work, "Working directory");
    app.add_option("--jobs", jobs, "Parallel jobs (0: all cores, capped by PCE_THREADS)");
    app.add_option("--epochs-scale", scale, "Scale every epoch count (below 1 is a smoke run, not acceptance)");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected(only.begin(), only.end());
    auto want = [&](int c) { return selected.empty() || selected.count(c) > 0; };
    const fs::path root(work);
    fs::create_directories(root);
    if (scale != 1.0)
        std::printf("note: epochs scaled by %g; results are not acceptance-grade\n", scale);

    std::vector<Line> lines;
    auto emit = [&](Line l)
    {
        print(l);
        lines.push_back(std::move(l));
    };

    try
    {
        // 1-3: numerical oracles.
        const double budgets[] = {kGradientBudgetS, kComplexBudgetS, kQuantizerBudgetS};
        for (int c = 1; c <= 3; ++c)
        {
            if (!want(c))
                continue;
            OracleResult r = c == 1 ? gradient_oracle(1) : c == 2 ? complex_oracle(1) : quantizer_oracle(1);
            const double budget = budgets[c - 1];
            std::string d = r.name + ": " + r.detail;
            if (r.seconds >= budget)
                d += "; over the " + std::to_string(static_cast<int>(budget)) + " s budget";
            emit({c, r.pass && r.seconds < budget, d, r.seconds});
        }

        // 4-10: desk-scale training on one shared dataset.
        const bool plateau = want(4);
        const bool variants = want(5) || want(6) || want(7) || want(8) || want(9) || want(10);
        if (plateau || variants)
        {
            const fs::path dataset = root / "desk.pce";
            ScenarioConfig sc = load_scenario((fs::path(PCE_CONFIG_DIR) / "desk_scenario.json").string());
            cmd_generate((fs::path(PCE_CONFIG_DIR) / "desk_scenario.json").string(), dataset.string(), quiet(jobs));
            const double diagonal = sc.grid_diagonal();
            const double separation = distance(sc.bs_positions[0], sc.bs_positions[1]);

            std::vector<ResultRecord> rows;
            double plateau_s = 0.0, variant_s = 0.0;
            if (plateau)
            {
                Phase p = run_phase(desk_spec("desk_plateau_spec.json", root / "plateau", dataset, scale), jobs);
                plateau_s = p.seconds;
                rows.insert(rows.end(), p.rows.begin(), p.rows.end());
            }
            if (variants)
            {
                Phase p = run_phase(desk_spec("desk_spec.json", root / "variants", dataset, scale), jobs);
                variant_s = p.seconds;
                rows.insert(rows.end(), p.rows.begin(), p.rows.end());
            }

            // Combined report (per-figure CSVs and summary) for inspection.
            const fs::path combined = root / "combined";
            fs::create_directories(combined);
            write_results(rows, (combined / "results.csv").string());
            if (variants)
            {
                fs::copy_file(root / "variants" / "meta.json", combined / "meta.json",
                              fs::copy_options::overwrite_existing);
                fs::copy_file(root / "variants" / "loc_errors.csv", combined / "loc_errors.csv",
                              fs::copy_options::overwrite_existing);
            }
            cmd_report((combined / "results.csv").string(), combined.string(), quiet(jobs));

            for (const AcceptanceLine &a : acceptance_from_results(rows, diagonal, separation))
            {
                if (a.criterion < 4 || a.criterion > 10 || !want(a.criterion))
                    continue;
                double secs = a.criterion == 4 ? plateau_s : variant_s;
                bool pass = a.status == "PASS";
                std::string d = a.status == "SKIP" ? "not evaluated: " + a.detail : a.detail;
                if (a.criterion == 4 && plateau_s >= kPlateauBudgetS)
                {
                    pass = false;
                    d += "; training over the 20 min budget";
                }
                if (a.criterion == 5 && variant_s >= kVariantBudgetS)
                {
                    pass = false;
                    d += "; training over the 30 min budget";
                }
                emit({a.criterion, pass, d, secs});
            }
        }

        // 11: two complete runs produce byte-identical CSVs.
        if (want(11))
        {
            auto t0 = Clock::now();
            auto a = full_run(root / "determinism_a", 1);
            auto b = full_run(root / "determinism_b", 2);
            std::size_t same = 0;
            std::string diff;
            for (const auto &[name, text] : a)
            {
                auto it = b.find(name);
                if (it != b.end() && it->second == text)
                    ++same;
                else if (diff.empty())
                    diff = "; first difference: " + name;
            }
            bool pass = same == a.size() && a.size() == b.size() && same > 0;
            emit({11, pass,
                  std::to_string(same) + "/" + std::to_string(a.size()) + " files identical across runs (jobs 1 vs 2)" +
                      diff,
                  since(t0)});
        }
    }
    catch (const std::exception &e)
    {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }

    std::size_t passed = 0;
    for (const auto &l : lines)
        passed += l.pass;
    std::printf("acceptance: %zu/%zu criteria passed\n", passed, lines.size());
    return passed == lines.size() ? 0 : 1;
}
