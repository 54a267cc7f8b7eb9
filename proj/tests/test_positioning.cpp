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

#include "pcenet/positioning.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pce;
using Catch::Approx;

namespace
{
    ScenarioConfig grid_scenario(int rows, int cols, double spacing)
    {
        ScenarioConfig c;
        c.bs_positions = {{-6.0, 0.5 * (rows - 1) * spacing}, {(cols + 8) * spacing, 0.8 * rows * spacing}};
        c.antennas = 8;
        c.grid = {{0.0, 0.0}, rows, cols, spacing};
        return c;
    }

    std::vector<std::size_t> all_indices(const Dataset &ds)
    {
        std::vector<std::size_t> v(ds.samples.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = i;
        return v;
    }

    double mean_error(const std::vector<Point2> &a, const std::vector<Point2> &b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += distance(a[i], b[i]);
        return s / static_cast<double>(a.size());
    }
}

TEST_CASE("position scaler", "[positioning]")
{
    std::vector<Point2> p{{0, 0}, {4, 0}, {0, 3}, {4, 3}};
    auto s = PositionScaler::from_positions(p);
    auto z = s.standardize({4, 3});
    CHECK(z.x == Approx(0.8));
    CHECK(z.y == Approx(0.6));
    auto back = s.restore(z);
    CHECK(back.x == Approx(4.0));
    CHECK(back.y == Approx(3.0));
}

TEST_CASE("localizer structure", "[positioning]")
{
    const std::size_t n = 8;
    auto g = build_localizer(8, 1);
    std::size_t closed = (2 * n * 8 * n + 8 * n) + 2 * (8 * n * 8 * n + 8 * n) + (8 * n * 2 + 2);
    CHECK(g.parameter_count() == closed);
    CHECK(localizer_parameter_count(8) == closed);
    CHECK(g.output_width() == 2);
    for (const auto &l : g.layers())
        if (l.kind == nn::LayerKind::dense && l.name != "position")
            CHECK(l.width == 8 * n);
}

TEST_CASE("localizer training", "[positioning]")
{
    Dataset ds = generate_dataset(grid_scenario(6, 6, 2.0));
    auto scaler = PositionScaler::from_dataset(ds);

    SECTION("a single repeated pair is learned to centimetres")
    {
        auto idx = std::vector<std::size_t>(16, 7);
        LocalizationSet set{channel_rows(ds, idx, ChannelSelector::main), dataset_positions(ds, idx)};
        auto g = build_localizer(8, 2);
        train_localizer(g, set, {}, scaler, {400, 16, 1e-3, 3, std::nullopt});
        Point2 p = localize(g, to_cvector(ds.samples[7].h_main), scaler);
        CHECK(distance(p, ds.samples[7].point()) < 1e-2);
    }
    SECTION("zero epochs leave the weights untouched")
    {
        auto idx = ds.indices(Split::train);
        LocalizationSet set{channel_rows(ds, idx, ChannelSelector::main), dataset_positions(ds, idx)};
        auto g = build_localizer(8, 2);
        auto before = nn::encode_parameters(g);
        train_localizer(g, set, {}, scaler, {0, 16, 1e-3, 3, std::nullopt});
        CHECK(nn::encode_parameters(g) == before);
    }
    SECTION("clean training channels localize better than corrupted ones")
    {
        auto tr = ds.indices(Split::train);
        nn::NumericArray clean = channel_rows(ds, tr, ChannelSelector::main);
        nn::NumericArray noisy = clean;
        std::mt19937_64 rng(5);
        for (std::size_t r = 0; r < noisy.rows(); ++r)
            nn::awgn_apply(noisy.row(r), -5.0, rng);
        auto truth = dataset_positions(ds, tr);
        TrainConfig tc{150, 8, 1e-3, 4, std::nullopt};
        auto gc = build_localizer(8, 6), gn = build_localizer(8, 6);
        train_localizer(gc, {clean, truth}, {}, scaler, tc);
        train_localizer(gn, {noisy, truth}, {}, scaler, tc);
        CHECK(mean_error(localize(gc, clean, scaler), truth) < mean_error(localize(gn, noisy, scaler), truth));
    }
    SECTION("inference is deterministic and batch-consistent")
    {
        auto g = build_localizer(8, 9);
        auto idx = all_indices(ds);
        auto rows = channel_rows(ds, idx, ChannelSelector::main);
        auto batch = localize(g, rows, scaler);
        CHECK(batch == localize(g, rows, scaler));
        for (std::size_t i = 0; i < idx.size(); i += 5)
            CHECK(distance(localize(g, to_cvector(ds.samples[i].h_main), scaler), batch[i]) < 1e-9);
    }
}

TEST_CASE("localization errors and CDF", "[positioning]")
{
    LocalizationReport r;
    r.errors = {1, 2, 3};
    r.sorted = r.errors;
    CHECK(error_cdf(r, 0.5) == 2.0);
    CHECK(error_cdf(r, 1.0) == 3.0);
    LocalizationReport two;
    two.errors = {0, 10};
    two.sorted = two.errors;
    CHECK(error_cdf(two, 0.9) == Approx(9.0));
    double last = -1.0;
    for (int q = 0; q <= 100; ++q)
    {
        double v = error_cdf(r, q / 100.0);
        CHECK(v >= last);
        last = v;
    }
    CHECK_THROWS_AS(error_cdf(r, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(error_cdf(LocalizationReport{}, 0.5), std::invalid_argument);

    std::vector<Point2> est{{0, 0}, {3, 4}}, truth{{0, 0}, {0, 0}};
    set_warning_sink([](const std::string &) {});
    auto rep = localization_report(est, truth, BoundingBox{-1, 1, -1, 1});
    set_warning_sink(nullptr);
    CHECK(rep.mean == Approx(2.5));
    CHECK(rep.outside_box == 1);
    std::vector<Point2> bad{{std::nan(""), 0}, {0, 0}};
    CHECK_THROWS_AS(localization_report(bad, truth), NumericError);
}

TEST_CASE("charting pair", "[positioning][charting]")
{
    const std::size_t n = 8;
    auto pair = build_charting_pair(8, 1, 2);
    auto vae = build_vanilla_autoencoder(8, 1, 2);
    std::size_t enc = (2 * n * 4 * n + 4 * n) + 2 * (4 * n * 4 * n + 4 * n) + (4 * n * 2 + 2);
    std::size_t dec_core = (2 * 2 * n + 2 * n) + 2 * (2 * n * 8 * n + 8 * n + 8 * n * 2 * n + 2 * n);
    CHECK(pair.encoder.parameter_count() + pair.decoder.parameter_count() == enc + dec_core + 2 * n * n + n);
    CHECK(charting_parameter_count(8, 2, n) == enc + dec_core + 2 * n * n + n);
    CHECK(vae.encoder.parameter_count() + vae.decoder.parameter_count() ==
          enc + dec_core + 2 * n * 2 * n + 2 * n);
    CHECK(pair.decoder.output_width() == n);
    CHECK(vae.decoder.output_width() == 2 * n);

    Dataset ds = generate_dataset(grid_scenario(5, 6, 2.0));
    auto tr = ds.indices(Split::train);
    auto x = channel_rows(ds, tr, ChannelSelector::main);
    auto lat = latents(pair.encoder, x);
    for (double v : lat.values())
    {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }

    SECTION("training lowers the loss and zero epochs are a no-op")
    {
        SupervisedSet set{{x}, angular_rows(ds, tr, ChannelSelector::side)};
        auto p0 = build_charting_pair(8, 1, 2);
        auto before = nn::encode_parameters(p0.encoder);
        train_charting(p0, set, {}, {0, 8, 1e-3, 1, std::nullopt});
        CHECK(nn::encode_parameters(p0.encoder) == before);
        auto p1 = build_charting_pair(8, 1, 2);
        auto h = train_charting(p1, set, {}, {100, 8, 1e-3, 1, std::nullopt});
        CHECK(h.epochs.back().train_loss < h.epochs.front().train_loss);

        auto v1 = build_vanilla_autoencoder(8, 1, 2);
        auto hv = train_vanilla_autoencoder(v1, x, {}, {60, 8, 1e-3, 1, std::nullopt});
        CHECK(hv.epochs.back().train_loss < hv.epochs.front().train_loss);
        auto vl = latents(v1.encoder, x);
        for (double v : vl.values())
        {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
    SECTION("negative charting targets are rejected")
    {
        SupervisedSet set{{x}, nn::NumericArray::matrix(x.rows(), n, -1.0)};
        CHECK_THROWS_AS(train_charting(pair, set, {}, {1, 8, 1e-3, 1, std::nullopt}), std::invalid_argument);
    }
}

TEST_CASE("chart quality", "[positioning][charting]")
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<Point2> truth(1000);
    for (auto &p : truth)
        p = {u(rng), u(rng)};
    nn::NumericArray affine = nn::NumericArray::matrix(truth.size(), 2);
    nn::NumericArray swapped = affine, noise = affine;
    std::uniform_real_distribution<double> r(0.0, 1.0);
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        affine.at(i, 0) = 0.01 * truth[i].x + 0.2;
        affine.at(i, 1) = 0.01 * truth[i].y + 0.3;
        swapped.at(i, 0) = truth[i].y;
        swapped.at(i, 1) = truth[i].x;
        noise.at(i, 0) = r(rng);
        noise.at(i, 1) = r(rng);
    }
    CHECK(chart_quality(affine, truth).score == Approx(1.0).margin(1e-9));
    CHECK(chart_quality(swapped, truth).score == Approx(1.0).margin(1e-9));
    CHECK(std::abs(chart_quality(noise, truth).score) < 0.1);
    CHECK(chart_quality(affine, truth).pairs == 100000);

    std::vector<double> vals{3.0, 1.0, 3.0, 2.0};
    CHECK(average_ranks(vals) == std::vector<double>{3.5, 1.0, 3.5, 2.0});

    set_warning_sink([](const std::string &) {});
    std::vector<Point2> few(12, Point2{1.0, 1.0});
    auto deg = chart_quality(nn::NumericArray::matrix(12, 2, 0.5), few);
    set_warning_sink(nullptr);
    CHECK(deg.degenerate);
    CHECK(deg.score == 0.0);
}
