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

#include "pcenet/e2e_csi.hpp"
#include "pcenet/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pce;
using Catch::Approx;

namespace
{
    ScenarioConfig toy_scenario(int antennas = 4, int rows = 5, int cols = 4)
    {
        ScenarioConfig c;
        c.bs_positions = {{-8.0, 3.0}, {25.0, 9.0}};
        c.antennas = antennas;
        c.scatterers = {{2.0, -4.0}, {9.0, 12.0}};
        c.grid = {{0.0, 0.0}, rows, cols, 1.0};
        return c;
    }

    E2EConfig toy_e2e(int epochs)
    {
        E2EConfig c;
        c.antennas = 4;
        c.pilot_len = 4;
        c.feedback_bits = 32;
        c.residual_blocks = 2;
        c.train = {epochs, 8, 3e-3, 5, std::nullopt};
        return c;
    }

    CVector random_cvector(std::size_t n, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> g;
        CVector v(n);
        for (auto &x : v)
            x = {g(rng), g(rng)};
        return v;
    }

    PilotMatrix random_pilot(std::size_t n, std::size_t l, std::mt19937_64 &rng)
    {
        PilotMatrix x{n, l, random_cvector(n * l, rng)};
        return x;
    }

    double norm2(const CVector &v)
    {
        double s = 0.0;
        for (auto x : v)
            s += std::norm(x);
        return s;
    }

    double residual(const CVector &y, const CVector &h, const PilotMatrix &x)
    {
        double r = 0.0;
        for (std::size_t l = 0; l < x.len; ++l)
        {
            cd acc = 0.0;
            for (std::size_t n = 0; n < x.antennas; ++n)
                acc += h[n] * x.at(n, l);
            r += std::norm(y[l] - acc);
        }
        return r;
    }

    ChannelStatistics random_statistics(std::size_t n, std::mt19937_64 &rng)
    {
        ChannelStatistics s;
        s.mean = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(n));
        auto m = random_cvector(n, rng);
        for (std::size_t i = 0; i < n; ++i)
            s.mean(static_cast<Eigen::Index>(i)) = 0.3 * m[i];
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        s.cov = a.adjoint() * a + 0.1 * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        return s;
    }
}

TEST_CASE("pilot reception", "[e2e]")
{
    PilotMatrix x{1, 1, {cd(1.0, 1.0)}};
    CHECK(simulate_pilot_reception(std::vector<cd>{cd(1.0, 0.0)}, x, std::nullopt, 1)[0] == cd(1.0, 1.0));
    PilotMatrix j{1, 1, {cd(0.0, 1.0)}};
    auto y = simulate_pilot_reception(std::vector<cd>{cd(0.0, 1.0)}, j, std::nullopt, 1);
    CHECK(std::abs(y[0] - cd(-1.0, 0.0)) < 1e-15);

    OracleResult r = complex_oracle(3, 200);
    INFO(r.detail);
    CHECK(r.pass);

    std::mt19937_64 rng(1);
    auto x3 = random_pilot(8, 3, rng);
    CHECK_THROWS_AS(simulate_pilot_reception(random_cvector(7, rng), x3, std::nullopt, 1), std::invalid_argument);
}

TEST_CASE("E2E graph structure", "[e2e]")
{
    E2EConfig c = toy_e2e(1);
    c.antennas = 8;
    c.pilot_len = 3;
    c.feedback_bits = 24;
    auto g = build_e2e_graph(c);
    const std::size_t n = 8, l = 3, m = 6, b = 2;
    std::size_t closed = 2 * n * l                       // pilot
                         + (2 * l * 2 * m + 2 * m)       // compression 1
                         + (2 * m * m + m)               // compression 2
                         + (m * 2 * n + 2 * n)           // reconstruction input
                         + b * (2 * n * 8 * n + 8 * n + 8 * n * 2 * n + 2 * n);
    CHECK(g.parameter_count() == closed);
    CHECK(e2e_parameter_count(c) == closed);
    CHECK(g.count(nn::LayerKind::quantize) == 1);
    int q = g.node(layer_names::codeword);
    CHECK(g.node("compress2.act") < q);
    CHECK(q < g.node("rec.init"));

    nn::NumericArray h = nn::NumericArray::matrix(5, 2 * n, 0.1);
    CHECK(nn::forward(g, h).output().shape() == std::vector<std::size_t>{5, 2 * n});

    E2EConfig bad = c;
    bad.feedback_bits = 25;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.pilot_len = 9;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("E2E training", "[e2e]")
{
    Dataset ds = generate_dataset(toy_scenario());
    REQUIRE(ds.samples.size() == 20);

    SECTION("zero epochs leave the initialization untouched")
    {
        E2EConfig c = toy_e2e(0);
        auto g = build_e2e_graph(c);
        auto before = g.parameters();
        train_e2e(g, ds, ChannelSelector::side, c);
        for (std::size_t i = 0; i < before.size(); ++i)
            CHECK(g.parameters()[i].value == before[i].value);
    }
    SECTION("training lowers the training NMSE and keeps pilot power")
    {
        E2EConfig c1 = toy_e2e(1), c200 = toy_e2e(200);
        auto g1 = build_e2e_graph(c1), g200 = build_e2e_graph(c200);
        train_e2e(g1, ds, ChannelSelector::side, c1);
        train_e2e(g200, ds, ChannelSelector::side, c200);
        double n1 = evaluate_pipeline(g1, ds, Split::train, ChannelSelector::side, std::nullopt, 1).linear;
        double n200 = evaluate_pipeline(g200, ds, Split::train, ChannelSelector::side, std::nullopt, 1).linear;
        CHECK(n200 < n1);
        PilotMatrix x = pilot_from_graph(g200);
        for (std::size_t l = 0; l < x.len; ++l)
            CHECK(std::sqrt(x.column_power(l)) == Approx(std::sqrt(c200.power)).margin(1e-6));

        SECTION("evaluation is deterministic and noise never helps")
        {
            auto a = evaluate_pipeline(g200, ds, Split::test, ChannelSelector::side, 0.0, 9);
            auto b = evaluate_pipeline(g200, ds, Split::test, ChannelSelector::side, 0.0, 9);
            CHECK(a.linear == b.linear);
            auto clean = evaluate_pipeline(g200, ds, Split::train, ChannelSelector::side, std::nullopt, 9);
            auto noisy = evaluate_pipeline(g200, ds, Split::train, ChannelSelector::side, 0.0, 9);
            CHECK(clean.linear <= noisy.linear);
        }
    }
    SECTION("an untrained model is near 0 dB or worse")
    {
        E2EConfig c = toy_e2e(0);
        auto g = build_e2e_graph(c);
        CHECK(evaluate_pipeline(g, ds, Split::train, ChannelSelector::side, std::nullopt, 1).db > -1.0);
    }
    SECTION("identical seeds give identical parameters")
    {
        E2EConfig c = toy_e2e(5);
        auto a = build_e2e_graph(c), b = build_e2e_graph(c);
        train_e2e(a, ds, ChannelSelector::side, c);
        train_e2e(b, ds, ChannelSelector::side, c);
        CHECK(nn::encode_parameters(a) == nn::encode_parameters(b));
    }
}

TEST_CASE("NMSE", "[e2e]")
{
    std::vector<CVector> t{{cd(1, 0), cd(1, 0)}};
    auto same = nmse(t, t);
    CHECK(same.linear == 0.0);
    CHECK(same.db == kNmseNegInfDb);
    std::vector<CVector> zero{{cd(0, 0), cd(0, 0)}};
    CHECK(nmse(t, zero).linear == 1.0);
    CHECK(nmse(t, zero).db == 0.0);
    std::vector<CVector> half{{cd(1, 0), cd(0, 0)}};
    CHECK(nmse(t, half).linear == 0.5);
    CHECK(nmse(t, half).db == Approx(-3.0103).margin(1e-4));
    CHECK_THROWS_AS(nmse(zero, t), std::invalid_argument);
}

TEST_CASE("least squares", "[e2e][baseline]")
{
    std::mt19937_64 rng(21);
    SECTION("full pilot recovers the channel exactly")
    {
        auto h = random_cvector(4, rng);
        PilotMatrix x = baseline_pilot(4, 4, 2.0);
        auto est = ls_estimate(simulate_pilot_reception(h, x, std::nullopt, 1), x);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(est[i] - h[i]) < 1e-12);
    }
    SECTION("short pilot: least squares and minimum norm")
    {
        auto h = random_cvector(6, rng);
        auto x = random_pilot(6, 3, rng);
        auto y = simulate_pilot_reception(h, x, 5.0, 4);
        auto est = ls_estimate(y, x);
        double r0 = residual(y, est, x);
        std::normal_distribution<double> g(0.0, 0.1);
        for (int t = 0; t < 100; ++t)
        {
            CVector p = est;
            for (auto &v : p)
                v += cd(g(rng), g(rng));
            CHECK(r0 <= residual(y, p, x) + 1e-12);
        }
        // Null-space directions of X^T leave the fit unchanged but add norm.
        Eigen::MatrixXcd xt = x.matrix().transpose();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(xt);
        Eigen::MatrixXcd ker = lu.kernel();
        REQUIRE(ker.cols() == 3);
        for (Eigen::Index k = 0; k < ker.cols(); ++k)
        {
            CVector p = est;
            for (std::size_t i = 0; i < 6; ++i)
                p[i] += 0.5 * ker(static_cast<Eigen::Index>(i), k);
            CHECK(residual(y, p, x) == Approx(r0).margin(1e-9));
            CHECK(norm2(p) > norm2(est));
        }
    }
}

TEST_CASE("linear MMSE", "[e2e][baseline]")
{
    std::mt19937_64 rng(33);
    auto stats = random_statistics(4, rng);
    auto h = random_cvector(4, rng);
    PilotMatrix x = baseline_pilot(4, 4, 1.0);
    auto y = simulate_pilot_reception(h, x, std::nullopt, 1);

    auto exact = mmse_estimate(y, x, 0.0, stats);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(exact[i] - h[i]) < 1e-9);

    auto prior = mmse_estimate(y, x, 1e12, stats);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(prior[i] - stats.mean(static_cast<Eigen::Index>(i))) < 1e-6);

    SECTION("scalar Wiener formula")
    {
        ChannelStatistics s;
        s.mean = Eigen::RowVectorXcd::Constant(1, cd(0.2, -0.1));
        s.cov = Eigen::MatrixXcd::Constant(1, 1, cd(1.7, 0.0));
        PilotMatrix px{1, 1, {cd(0.6, 0.8)}};
        cd yy(0.9, 0.3);
        double var = 0.4;
        cd mu = s.mean(0), xx = px.values[0];
        double c = 1.7;
        cd expect = mu + (yy - mu * xx) * std::conj(xx) * c / (std::norm(xx) * c + var);
        auto got = mmse_estimate(std::vector<cd>{yy}, px, var, s);
        CHECK(std::abs(got[0] - expect) < 1e-12);
    }
    SECTION("singular inner matrix is a numeric error")
    {
        ChannelStatistics s;
        s.mean = Eigen::RowVectorXcd::Zero(2);
        s.cov = Eigen::MatrixXcd::Zero(2, 2);
        PilotMatrix px = baseline_pilot(2, 2, 1.0);
        CHECK_THROWS_AS(mmse_estimate(std::vector<cd>{1.0, 1.0}, px, 0.0, s), NumericError);
    }
}

TEST_CASE("baseline pilots and evaluation", "[e2e][baseline]")
{
    PilotMatrix eye = baseline_pilot(4, 4, 2.0);
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t l = 0; l < 4; ++l)
            CHECK(std::abs(eye.at(n, l) - (n == l ? cd(std::sqrt(2.0), 0.0) : cd(0.0, 0.0))) < 1e-15);
    PilotMatrix dft = baseline_pilot(8, 3, 1.0);
    for (std::size_t l = 0; l < 3; ++l)
        CHECK(dft.column_power(l) == Approx(1.0).epsilon(1e-12));

    Dataset ds = generate_dataset(toy_scenario());
    auto ls = evaluate_baseline(Baseline::ls, ds, Split::test, ChannelSelector::side, 4, 1.0, 10.0, 3);
    auto again = evaluate_baseline(Baseline::ls, ds, Split::test, ChannelSelector::side, 4, 1.0, 10.0, 3);
    CHECK(ls.linear == again.linear);
    auto mm = evaluate_baseline(Baseline::mmse, ds, Split::test, ChannelSelector::side, 4, 1.0, 10.0, 3);
    CHECK(mm.linear <= ls.linear);
    auto clean = evaluate_baseline(Baseline::ls, ds, Split::test, ChannelSelector::side, 4, 1.0, std::nullopt, 3);
    CHECK(clean.db < -100.0);
}
