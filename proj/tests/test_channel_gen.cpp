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

#include "pcenet/channel_gen.hpp"
#include "pcenet/error.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

using namespace pce;
using Catch::Approx;

namespace
{
    constexpr double pi = std::numbers::pi;

    ScenarioConfig small_config(int rows = 4, int cols = 5)
    {
        ScenarioConfig c;
        c.bs_positions = {{-10.0, 4.0}, {30.0, 12.0}};
        c.antennas = 8;
        c.scatterers = {{3.0, -5.0}, {10.0, 15.0}, {-4.0, 9.0}};
        c.grid = {{0.0, 0.0}, rows, cols, 1.5};
        c.env_seed = 3;
        return c;
    }
}

TEST_CASE("steering vector examples", "[channel_gen]")
{
    auto a = steering_vector(0.0, 4);
    for (auto v : a)
        CHECK(std::abs(v - cd(1.0, 0.0)) < 1e-15);
    auto b = steering_vector(pi / 2, 2);
    CHECK(std::abs(b[1] - cd(-1.0, 0.0)) < 1e-12);
    auto c = steering_vector(pi / 6, 2);
    CHECK(std::abs(c[1] - cd(0.0, 1.0)) < 1e-12);
    CHECK_THROWS_AS(steering_vector(std::nan(""), 4), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector(0.0, 0), std::invalid_argument);
}

TEST_CASE("path synthesis", "[channel_gen]")
{
    ScenarioConfig c = small_config();
    c.ue_height = c.bs_height; // planar distances

    SECTION("no scatterers gives only the LOS path")
    {
        c.scatterers.clear();
        CHECK(synthesize_paths(c, 0, {5.0, 5.0}).size() == 1);
    }
    SECTION("doubling the distance halves the LOS amplitude")
    {
        c.scatterers.clear();
        Point2 bs = c.bs_positions[0];
        Point2 near{bs.x + 10.0, bs.y}, far{bs.x + 20.0, bs.y};
        double a1 = std::abs(synthesize_paths(c, 0, near)[0].gain);
        double a2 = std::abs(synthesize_paths(c, 0, far)[0].gain);
        CHECK(a2 == Approx(a1 / 2).epsilon(1e-12));
    }
    SECTION("max_paths keeps the strongest scatterers")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-40.0, 40.0);
        c.scatterers.clear();
        for (int i = 0; i < 12; ++i)
            c.scatterers.push_back({u(rng), u(rng)});
        c.max_paths = 10;
        Point2 ue{2.0, 3.0};
        auto paths = synthesize_paths(c, 0, ue);
        REQUIRE(paths.size() == 11);

        // Brute-force amplitudes of every scatterer path.
        std::vector<double> amps;
        for (auto s : c.scatterers)
        {
            double len = distance(c.bs_positions[0], s) + distance(s, ue);
            amps.push_back(c.reflection_loss * c.wavelength / (4 * pi * len));
        }
        std::sort(amps.rbegin(), amps.rend());
        for (std::size_t k = 0; k < 10; ++k)
            CHECK(std::abs(paths[k + 1].gain) == Approx(amps[k]).epsilon(1e-12));
    }
    SECTION("UE on top of the BS is rejected")
    {
        CHECK_THROWS_AS(synthesize_paths(c, 0, c.bs_positions[0]), std::invalid_argument);
        CHECK_THROWS_AS(synthesize_paths(c, 5, {1, 1}), std::invalid_argument);
    }
}

TEST_CASE("channel from paths", "[channel_gen]")
{
    std::vector<PropagationPath> one{{0.0, {1.0, 0.0}}};
    auto h = channel_from_paths(one, 2);
    CHECK(std::abs(h[0] - cd(1, 0)) < 1e-15);
    CHECK(std::abs(h[1] - cd(1, 0)) < 1e-15);

    std::vector<PropagationPath> cancel{{0.3, {0.4, -0.2}}, {0.3, {-0.4, 0.2}}};
    for (auto v : channel_from_paths(cancel, 6))
        CHECK(std::abs(v) < 1e-15);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(-pi / 2, pi / 2), g(-1.0, 1.0);
    std::vector<PropagationPath> three;
    for (int i = 0; i < 3; ++i)
        three.push_back({ang(rng), {g(rng), g(rng)}});
    auto fast = channel_from_paths(three, 8);
    for (int k = 0; k < 8; ++k)
    {
        cd acc = 0.0;
        for (auto &p : three)
            acc += p.gain * std::exp(cd(0.0, pi * k * std::sin(p.departure_angle)));
        CHECK(std::abs(acc - fast[k]) < 1e-12);
    }

    SECTION("additive in path gains")
    {
        std::vector<PropagationPath> a{three[0]}, b{three[1], three[2]};
        auto ha = channel_from_paths(a, 8), hb = channel_from_paths(b, 8);
        for (int k = 0; k < 8; ++k)
            CHECK(std::abs(ha[k] + hb[k] - fast[k]) < 1e-12);
    }
    CHECK_THROWS_AS(channel_from_paths({}, 4), std::invalid_argument);
}

TEST_CASE("dataset generation", "[channel_gen]")
{
    SECTION("split sizes on a 2 x 3 grid")
    {
        auto c = small_config(2, 3);
        Dataset ds = generate_dataset(c);
        CHECK(ds.samples.size() == 6);
        CHECK(ds.count(Split::train) == 5);
        CHECK(ds.count(Split::val) == 0);
        CHECK(ds.count(Split::test) == 1);
    }
    auto c = small_config();
    Dataset a = generate_dataset(c);
    SECTION("4 x 5 grid holds 20 samples and is deterministic")
    {
        CHECK(a.samples.size() == 20);
        CHECK(encode_dataset(a) == encode_dataset(generate_dataset(c)));
    }
    SECTION("train main channels have unit mean per-antenna power")
    {
        double p = 0.0;
        auto tr = a.indices(Split::train);
        for (auto i : tr)
            for (auto v : a.samples[i].h_main)
                p += std::norm(std::complex<double>(v));
        p /= static_cast<double>(tr.size() * static_cast<std::size_t>(a.antennas));
        // Stored values are float32, so the check is at float resolution.
        CHECK(p == Approx(1.0).margin(1e-6));
    }
    SECTION("every sample regenerates from its position")
    {
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            CHECK(regenerate_sample(c, i, a.norm_scale) == a.samples[i]);
    }
    SECTION("grid positions map to distinct main channels")
    {
        std::set<std::vector<float>> seen;
        for (const auto &s : a.samples)
        {
            std::vector<float> key;
            for (auto v : s.h_main)
            {
                key.push_back(v.real());
                key.push_back(v.imag());
            }
            CHECK(seen.insert(key).second);
        }
    }
    SECTION("invalid configs name the field")
    {
        auto bad = c;
        bad.grid.spacing = 0.0;
        try
        {
            bad.validate();
            FAIL("expected a validation error");
        }
        catch (const std::invalid_argument &e)
        {
            CHECK(std::string(e.what()).find("grid.spacing") != std::string::npos);
        }
        bad = c;
        bad.bs_positions.resize(1);
        CHECK_THROWS_AS(generate_dataset(bad), std::invalid_argument);
    }
}

TEST_CASE("angular transform", "[channel_gen]")
{
    CVector ones(4, cd(1.0, 0.0));
    auto a = angular_transform(ones);
    CHECK(a[0] == Approx(2.0).epsilon(1e-14));
    for (int k = 1; k < 4; ++k)
        CHECK(std::abs(a[k]) < 1e-14);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    CVector h(8);
    for (auto &v : h)
        v = {g(rng), g(rng)};
    auto t = angular_transform(h);
    double eh = 0.0, et = 0.0;
    for (auto v : h)
        eh += std::norm(v);
    for (double v : t)
        et += v * v;
    CHECK(std::abs(std::sqrt(et) - std::sqrt(eh)) / std::sqrt(eh) < 1e-10);
    for (std::size_t k = 0; k < 8; ++k)
    {
        cd acc = 0.0;
        for (std::size_t m = 0; m < 8; ++m)
            acc += h[m] * std::exp(cd(0.0, 2 * pi * double(k * m) / 8.0));
        CHECK(std::abs(std::abs(acc) / std::sqrt(8.0) - t[k]) < 1e-10);
    }
    CHECK_THROWS_AS(angular_transform(CVector{}), std::invalid_argument);
}

TEST_CASE("dataset file format", "[channel_gen][io]")
{
    Dataset ds = generate_dataset(small_config());
    auto path = (std::filesystem::temp_directory_path() / "pcenet_test_ds.pce").string();
    save_dataset(ds, path);
    CHECK(load_dataset(path) == ds);

    auto bytes = encode_dataset(ds);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad), FormatError);

    auto short_bytes = bytes;
    short_bytes.pop_back();
    try
    {
        decode_dataset(short_bytes);
        FAIL("expected truncation error");
    }
    catch (const FormatError &e)
    {
        std::string msg = e.what();
        CHECK(msg.find("truncated") != std::string::npos);
        CHECK(msg.find("expected") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset("/nonexistent/pcenet.pce"), IoError);
    CHECK(dataset_hash(ds) == dataset_hash(load_dataset(path)));
    std::filesystem::remove(path);
}

TEST_CASE("scenario JSON round trip", "[channel_gen][io]")
{
    auto c = small_config();
    auto back = parse_scenario(scenario_to_json(c));
    CHECK(encode_dataset(generate_dataset(back)) == encode_dataset(generate_dataset(c)));
    CHECK_THROWS_AS(parse_scenario("{not json"), std::invalid_argument);
}
