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

// Runs the command-line tool as a subprocess and checks its exit codes.

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace
{
    const fs::path kWork = fs::temp_directory_path() / "pce_cli_test";

    struct Run
    {
        int code = -1;
        std::string err;
    };

    Run pcelab(const std::string &args, const std::string &env = "")
    {
        fs::path err = kWork / "stderr.txt";
        std::string cmd = env + " '" + std::string(PCELAB_PATH) + "' " + args + " >/dev/null 2>'" + err.string() + "'";
        int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(err);
        std::ostringstream s;
        s << in.rdbuf();
        r.err = s.str();
        return r;
    }

    std::string write(const std::string &leaf, const std::string &text)
    {
        std::ofstream(kWork / leaf) << text;
        return "'" + (kWork / leaf).string() + "'";
    }

    std::string scenario(const std::string &spacing)
    {
        return R"({"bs_positions": [[-10.0, 6.0], [40.0, 10.0]], "antennas": 8,
                   "grid": {"origin": [0.0, 0.0], "rows": 4, "cols": 5, "spacing": )" +
               spacing + "}}";
    }

    const char *kSpec = R"({"scenario": "scenario.json", "out": "run", "variants": ["e2e", "mmse"],
        "pilot_lens": [2], "test_snr_db": [0, 10], "residual_blocks": 1, "main": {"pilot_len": 4, "feedback_bits": 16},
        "training": {"batch_size": 8, "e2e_epochs": 2, "localizer_epochs": 1, "charting_epochs": 1}})";
}

TEST_CASE("command-line exit codes", "[cli]")
{
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write("scenario.json", scenario("2.0"));
    std::string spec = write("spec.json", kSpec);

    SECTION("usage errors and invalid configs exit 2")
    {
        CHECK(pcelab("--no-such-flag").code == 2);
        CHECK(pcelab("train").code == 2);
        auto r = pcelab("generate --config " + write("bad.json", scenario("0")) + " --out " +
                        (kWork / "bad.pce").string());
        CHECK(r.code == 2);
        CHECK(r.err.find("grid.spacing") != std::string::npos);
        CHECK(pcelab("train --spec " + spec, "PCE_THREADS=lots").code == 2);
        CHECK(pcelab("--help").code == 0);
    }
    SECTION("missing dataset exits 3, missing checkpoint exits 4")
    {
        CHECK(pcelab("train --spec " + spec).code == 3);
        CHECK(pcelab("generate --config " + (kWork / "scenario.json").string() + " --out " +
                     (kWork / "run" / "dataset.pce").string())
                  .code == 0);
        auto r = pcelab("sweep --spec " + spec);
        CHECK(r.code == 4);
        CHECK(r.err.find("e2e_L2_N16_s1") != std::string::npos);
        CHECK(pcelab("sweep --train-on-demand --spec " + spec + " --jobs 1").code == 0);
        CHECK(pcelab("report --spec " + spec).code == 0);
        CHECK(fs::exists(kWork / "run" / "summary.txt"));
    }
    SECTION("malformed results CSV exits 5")
    {
        auto r = pcelab("report " + write("bad.csv", "variant,L\ne2e,4\n") + " --out " + (kWork / "rep").string());
        CHECK(r.code == 5);
        CHECK(r.err.find("line 1") != std::string::npos);
    }
    SECTION("selftest passes")
    {
        CHECK(pcelab("selftest --seed 3").code == 0);
    }
    fs::remove_all(kWork);
}
