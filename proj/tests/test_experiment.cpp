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

#include "pcenet/experiment.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pce;
using Catch::Approx;
namespace fs = std::filesystem;

namespace
{
    const char *kScenario = R"({
  "bs_positions": [[-10.0, 6.0], [40.0, 10.0]],
  "antennas": 8,
  "scatterers": [[5.0, -6.0], [12.0, 20.0]],
  "grid": {"origin": [0.0, 0.0], "rows": 5, "cols": 6, "spacing": 2.0},
  "split": {"train": 0.7, "val": 0.1, "test": 0.2},
  "env_seed": 7
})";

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    // Fresh working directory holding scenario.json and a generated dataset.
    struct Workspace
    {
        fs::path dir;

        explicit Workspace(const std::string &name)
            : dir(fs::temp_directory_path() / ("pce_exp_" + name))
        {
            fs::remove_all(dir);
            fs::create_directories(dir);
            std::ofstream(dir / "scenario.json") << kScenario;
        }
        ~Workspace() { fs::remove_all(dir); }

        ExperimentSpec spec(const std::string &body) const
        {
            return parse_spec(R"({"scenario": "scenario.json", "out": "run", )" + body + "}", dir.string());
        }
        void generate(const ExperimentSpec &s) const
        {
            cmd_generate(s.scenario_path, s.dataset_path, {});
        }
    };

    const char *kSmallTraining = R"("residual_blocks": 1, "main": {"pilot_len": 4, "feedback_bits": 16},
        "training": {"batch_size": 8, "lr": 0.003, "e2e_epochs": 2, "localizer_epochs": 2, "charting_epochs": 2})";

    ResultRecord row(const std::string &v, int l, int nb, double snr, std::uint64_t seed, double db)
    {
        ResultRecord r;
        r.variant = v;
        r.pilot_len = l;
        r.feedback_bits = nb;
        r.test_snr_db = snr;
        r.seed = seed;
        r.nmse_db = db;
        return r;
    }
}

TEST_CASE("spec parsing and validation", "[experiment]")
{
    Workspace ws("spec");
    auto s = ws.spec(R"("variants": ["e2e", "ls"], "pilot_lens": [2, 4])");
    CHECK(s.scenario_path == (ws.dir / "scenario.json").string());
    CHECK(s.dataset_path == (ws.dir / "run" / "dataset.pce").string());
    CHECK(s.overhead_pairs() == std::vector<std::pair<int, int>>{{2, 16}, {4, 32}});

    auto pairs = ws.spec(R"("variants": ["e2e"], "variant_axes": {"e2e": {"pairs": [[8, 64], [4, 32]]}})");
    CHECK(pairs.overhead_pairs_for("e2e") == std::vector<std::pair<int, int>>{{8, 64}, {4, 32}});

    CHECK_THROWS_AS(ws.spec(R"("variants": ["e2e"], "colour": 3)"), std::invalid_argument);
    CHECK_THROWS_AS(ws.spec(R"("variants": ["transformer"])"), std::invalid_argument);
    CHECK_THROWS_AS(ws.spec(R"("variants": []")"), std::invalid_argument);
    CHECK_THROWS_AS(ws.spec(R"("variants": ["e2e"], "seeds": [])"), std::invalid_argument);
    CHECK_THROWS_AS(ws.spec(R"("variants": ["e2e"], "feedback_bits": [30])"), std::invalid_argument);

    ExperimentSpec scaled = s;
    RunOptions o;
    o.epochs_scale = 0.5;
    o.seed = 9;
    o.out_dir = (ws.dir / "elsewhere").string();
    apply_overrides(scaled, o);
    CHECK(scaled.scaled(500) == 250);
    CHECK(scaled.seeds == std::vector<std::uint64_t>{9});
    CHECK(scaled.out_dir == o.out_dir);
}

TEST_CASE("results CSV", "[experiment][csv]")
{
    ResultRecord a = row("pcenet_full", 4, 32, 10, 1, -11.25);
    a.loc_mean_err_m = 3.5;
    a.chart_score = 0.25;
    ResultRecord b = row("ls", 8, 0, 10, 1, kNmseNegInfDb);
    std::string text = results_header() + "\n" + format_record(a) + "\n" + format_record(b) + "\n";
    auto back = parse_results(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].variant == "pcenet_full");
    CHECK(back[0].nmse_db == Approx(-11.25));
    CHECK(*back[0].loc_mean_err_m == Approx(3.5));
    CHECK_FALSE(back[1].chart_score);
    CHECK(std::isinf(back[1].nmse_db));

    auto line_of = [](const std::string &csv)
    {
        try
        {
            parse_results(csv);
        }
        catch (const CsvError &e)
        {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("variant,L\n") == 1);
    CHECK(line_of(results_header() + "\n" + format_record(a) + "\ne2e,4,32,10,1,abc,,,0\n") == 3);
    CHECK(line_of(results_header() + "\ne2e,4,32,10\n") == 2);
    CHECK(line_of(results_header() + "\nmystery,4,32,10,1,-3,,,0\n") == 2);
    CHECK_THROWS_WITH(parse_results(results_header() + "\ne2e,4,32,10,1,nan,,,0\n"),
                      Catch::Matchers::StartsWith("line 2"));
}

TEST_CASE("aggregation over seeds", "[experiment]")
{
    std::vector<ResultRecord> rows{row("e2e", 4, 32, 10, 1, -10), row("e2e", 4, 32, 10, 2, -12),
                                   row("e2e", 4, 32, 10, 3, -14), row("e2e", 8, 64, 10, 1, -13)};
    auto s = aggregate(rows);
    REQUIRE(s.size() == 2);
    const auto &three = s[0].pilot_len == 4 ? s[0] : s[1];
    const auto &one = s[0].pilot_len == 4 ? s[1] : s[0];
    CHECK(three.n == 3);
    CHECK(three.nmse_mean == Approx(-12.0));
    CHECK(three.nmse_std == Approx(std::sqrt(8.0 / 3.0)));
    CHECK(one.n == 1);
    CHECK(one.nmse_std == 0.0);
}

TEST_CASE("acceptance lines cover every criterion", "[experiment]")
{
    std::vector<ResultRecord> rows{row("e2e", 8, 32, 10, 1, -8), row("e2e", 8, 64, 10, 1, -12),
                                   row("e2e", 8, 128, 10, 1, -12.5)};
    auto lines = acceptance_from_results(rows, 50.0, 150.0);
    REQUIRE(lines.size() == 11);
    for (int c = 1; c <= 11; ++c)
        CHECK(lines[static_cast<std::size_t>(c - 1)].criterion == c);
    CHECK(lines[3].status == "PASS");
    CHECK(lines[0].status == "SKIP");
    CHECK(lines[3].format().rfind("[C4] PASS", 0) == 0);
}

TEST_CASE("experiment commands", "[experiment][slow]")
{
    Workspace ws("run");

    SECTION("a missing dataset or checkpoint is reported")
    {
        auto s = ws.spec(std::string(R"("variants": ["e2e"], "pilot_lens": [2], )") + kSmallTraining);
        CHECK_THROWS_AS(cmd_train(s, {}), MissingDatasetError);
        ws.generate(s);
        CHECK_THROWS_AS(cmd_sweep(s, {}), MissingCheckpointError);
        RunOptions o;
        o.train_on_demand = true;
        CHECK(cmd_sweep(s, o).size() == 8);
    }
    SECTION("row count, determinism and history")
    {
        auto s = ws.spec(std::string(R"("variants": ["e2e", "pcenet_full", "ls", "mmse"], "pilot_lens": [2],
            "test_snr_db": [0, 5, 10], "seeds": [1, 2], "training": {"batch_size": 8, "lr": 0.003, "e2e_epochs": 3,
            "localizer_epochs": 2, "charting_epochs": 2}, "residual_blocks": 1,
            "main": {"pilot_len": 4, "feedback_bits": 16})"));
        ws.generate(s);
        RunOptions one;
        one.jobs = 1;
        cmd_train(s, one);
        auto rows = cmd_sweep(s, one);
        CHECK(rows.size() == 2 * 3 * 2 + 2 * 3 * 2);
        std::string first = slurp(fs::path(s.out_dir) / "results.csv");

        ExperimentSpec s2 = s;
        s2.out_dir = (ws.dir / "run2").string();
        fs::create_directories(s2.out_dir);
        RunOptions two;
        two.jobs = 2;
        cmd_train(s2, two);
        cmd_sweep(s2, two);
        CHECK(slurp(fs::path(s2.out_dir) / "results.csv") == first);
        CHECK(slurp(fs::path(s2.out_dir) / "history.csv") == slurp(fs::path(s.out_dir) / "history.csv"));

        std::istringstream hist(slurp(fs::path(s.out_dir) / "history.csv"));
        std::string line;
        std::map<std::string, int> counts;
        std::getline(hist, line);
        while (std::getline(hist, line))
            if (line.rfind("pcenet_full_L2_N16_s1,", 0) == 0)
            {
                std::istringstream f(line);
                std::string cell, stage, name;
                std::getline(f, cell, ',');
                std::getline(f, stage, ',');
                std::getline(f, name, ',');
                ++counts[name];
            }
        CHECK(counts["main_e2e"] == 3);
        CHECK(counts["localizer"] == 2);
        CHECK(counts["side"] == 3);

        auto summary = cmd_report((fs::path(s.out_dir) / "results.csv").string(), s.out_dir, {});
        CHECK(summary.find("[C4]") != std::string::npos);
        CHECK(fs::exists(fs::path(s.out_dir) / "fig10_like.csv"));
    }
    SECTION("zero epochs store the initialization")
    {
        auto s = ws.spec(R"("variants": ["pcenet_full"], "pilot_lens": [2], "residual_blocks": 1,
            "main": {"pilot_len": 4, "feedback_bits": 16}, "training": {"e2e_epochs": 0, "localizer_epochs": 0,
            "charting_epochs": 0, "batch_size": 8})");
        ws.generate(s);
        cmd_train(s, {});
        auto b = load_bundle((fs::path(s.out_dir) / "checkpoints" / "pcenet_full_L2_N16_s1").string());
        CHECK(nn::encode_parameters(*b.main) == nn::encode_parameters(build_e2e_graph(b.config.main)));
        CHECK(nn::encode_parameters(*b.side) ==
              nn::encode_parameters(build_side_graph(PcenetMode::full, b.config.side)));
        CHECK(nn::encode_parameters(*b.localizer) ==
              nn::encode_parameters(build_localizer(8, b.config.localizer.seed)));
    }
}

TEST_CASE("LMMSE meets LS with a full pilot as the noise vanishes", "[experiment][baseline]")
{
    Workspace ws("mmse");
    auto s = ws.spec(R"("variants": ["ls", "mmse"], "pilot_lens": [8], "test_snr_db": [150])");
    ws.generate(s);
    auto rows = cmd_sweep(s, {});
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(rows[0].nmse_db - rows[1].nmse_db) < 0.1);
}
