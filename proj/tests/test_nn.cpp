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

#include "pcenet/nn.hpp"
#include "pcenet/oracles.hpp"
#include "pcenet/training.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pce;
using namespace pce::nn;
using Catch::Approx;

namespace
{
    NumericArray row(std::vector<double> v)
    {
        std::size_t n = v.size();
        return NumericArray({1, n}, std::move(v));
    }
}

TEST_CASE("Glorot initialization", "[nn]")
{
    NetworkGraph g;
    g.dense("a", g.input("x", 2), 4);
    glorot_init(g, 3);
    for (double v : g.parameter("a.weight").value.values())
        CHECK(std::abs(v) <= 1.0);
    for (double v : g.parameter("a.bias").value.values())
        CHECK(v == 0.0);

    NetworkGraph h;
    h.dense("b", h.input("x", 8), 4, false);
    const double limit = std::sqrt(6.0 / 12.0);
    double max_abs = 0.0;
    std::size_t draws = 0;
    for (std::uint64_t seed = 0; draws < 10000; ++seed)
    {
        glorot_init(h, seed);
        for (double v : h.parameter("b.weight").value.values())
        {
            max_abs = std::max(max_abs, std::abs(v));
            CHECK(v == static_cast<double>(static_cast<float>(v)));
            ++draws;
        }
    }
    CHECK(max_abs <= limit);
    CHECK(max_abs > 0.95 * limit);

    NetworkGraph g2 = g;
    glorot_init(g2, 3);
    CHECK(g2.parameters()[0].value == g.parameters()[0].value);
}

TEST_CASE("forward examples", "[nn]")
{
    NetworkGraph empty;
    NumericArray x = row({1.5, -2.0, 0.25});
    CHECK(forward(empty, x).output() == x);

    NetworkGraph id;
    id.dense("fc", id.input("x", 2), 2, false);
    id.parameter("fc.weight").value.values() = {1, 0, 0, 1};
    CHECK(forward(id, row({0.3, -0.7})).output() == row({0.3, -0.7}));

    NetworkGraph t;
    t.dense("fc", t.input("x", 3), 4, Activation::tanh);
    glorot_init(t, 1);
    Activations zero = forward(t, row({0, 0, 0}));
    for (double v : zero.output().values())
        CHECK(v == 0.0);

    SECTION("NaN inputs are rejected")
    {
        CHECK_THROWS_AS(forward(t, row({0, std::nan(""), 0})), NumericError);
    }
    SECTION("shape mismatch is rejected")
    {
        CHECK_THROWS_AS(forward(t, row({0, 0})), std::invalid_argument);
    }
}

TEST_CASE("backward", "[nn]")
{
    SECTION("finite-difference oracle for every layer kind")
    {
        OracleResult r = gradient_oracle(11, 20);
        INFO(r.detail);
        CHECK(r.pass);
    }
    SECTION("zero upstream gradient gives zero parameter gradients")
    {
        NetworkGraph g;
        int x = g.input("x", 4);
        int h = g.dense("a", x, 6, Activation::sigmoid);
        g.dense("b", h, 3, Activation::tanh);
        glorot_init(g, 2);
        NumericArray in = NumericArray::matrix(2, 4, 0.3);
        auto cache = forward(g, in);
        auto grads = backward(g, cache, NumericArray::matrix(2, 3, 0.0));
        for (const auto &p : grads.params)
            for (double v : p.values())
                CHECK(v == 0.0);
    }
    SECTION("quantize passes the gradient through unchanged")
    {
        NetworkGraph g;
        g.quantize("q", g.input("x", 3), 4);
        auto cache = forward(g, row({0.1, 0.52, 0.97}));
        NumericArray up = row({0.25, -1.5, 3.0});
        CHECK(backward(g, cache, up).inputs.at(0) == up);
    }
    SECTION("backward without a matching cache is a state error")
    {
        NetworkGraph g;
        g.dense("a", g.input("x", 2), 2);
        Activations empty;
        CHECK_THROWS(backward(g, empty, row({1, 1})));
    }
}

TEST_CASE("Adam", "[nn]")
{
    SECTION("first step moves by about lr")
    {
        std::vector<Parameter> p{{"w", NumericArray({1}, 1.0)}};
        auto st = make_adam(p, 0.001);
        adam_step(st, p, {NumericArray({1}, 0.5)});
        CHECK(p[0].value[0] - 1.0 == Approx(-0.001 * 0.5 / (0.5 + st.eps)).epsilon(1e-9));
    }
    SECTION("zero gradients leave parameters unchanged")
    {
        std::vector<Parameter> p{{"w", NumericArray({2}, 0.7)}};
        auto st = make_adam(p, 0.01);
        adam_step(st, p, {NumericArray({2}, 1.0)});
        double after_one = p[0].value[0];
        double m = st.m[0][0];
        adam_step(st, p, {NumericArray({2}, 0.0)});
        CHECK(st.m[0][0] == Approx(0.9 * m));
        std::vector<Parameter> q{{"w", NumericArray({2}, 0.7)}};
        auto s2 = make_adam(q, 0.01);
        adam_step(s2, q, {NumericArray({2}, 0.0)});
        CHECK(q[0].value[0] == 0.7);
        CHECK(after_one < 0.7);
    }
    SECTION("least squares y = 2x converges")
    {
        NetworkGraph g;
        g.dense("fc", g.input("x", 1), 1, false);
        g.parameter("fc.weight").value[0] = 0.0;
        auto st = make_adam(g.parameters(), 0.01);
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int step = 0; step < 5000; ++step)
        {
            NumericArray x = NumericArray::matrix(16, 1);
            for (double &v : x.values())
                v = u(rng);
            auto cache = forward(g, x);
            NumericArray grad = NumericArray::matrix(16, 1);
            for (std::size_t i = 0; i < 16; ++i)
                grad[i] = 2.0 * (cache.output()[i] - 2.0 * x[i]) / 16.0;
            adam_step(st, g.parameters(), backward(g, cache, grad).params);
        }
        CHECK(g.parameter("fc.weight").value[0] == Approx(2.0).margin(1e-3));
    }
}

TEST_CASE("quantizer", "[nn]")
{
    CHECK(quantize_value(0.3, 2) == 0.375);
    CHECK(quantize_value(1.0, 2) == 0.875);
    CHECK(quantize_value(-3.0, 2) == 0.125);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i)
    {
        double x = u(rng);
        worst = std::max(worst, std::abs(quantize_value(x, 4) - x));
    }
    CHECK(worst <= 1.0 / 32.0);
    CHECK_THROWS_AS(quantize_value(std::nan(""), 4), NumericError);

    std::vector<double> levels{0.125, 0.875, 0.375};
    auto bits = encode_codeword(levels, 2);
    CHECK(bits == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 1});
    CHECK(decode_codeword(bits, 2) == levels);
    CHECK_THROWS_AS(level_index(0.3, 2), std::invalid_argument);
    CHECK_THROWS_AS(decode_codeword(std::vector<std::uint8_t>{1, 0, 1}, 2), std::invalid_argument);

    OracleResult r = quantizer_oracle();
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("awgn", "[nn]")
{
    std::vector<double> s{1.0, -2.0, 0.5, 0.25};
    CHECK(awgn_apply(s, std::nullopt, 1) == s);
    CHECK(awgn_apply(s, std::numeric_limits<double>::infinity(), 1) == s);
    CHECK(awgn_apply(s, 0.0, 7) == awgn_apply(s, 0.0, 7));
    CHECK(awgn_apply(s, 0.0, 7) != awgn_apply(s, 0.0, 8));

    std::mt19937_64 rng(12);
    double noise = 0.0, signal = 0.0;
    for (int t = 0; t < 100000; ++t)
    {
        std::vector<double> v{0.6, -0.8, 0.3, 0.1};
        std::vector<double> y = v;
        awgn_apply(std::span<double>(y), 0.0, rng);
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            noise += (y[i] - v[i]) * (y[i] - v[i]);
            signal += v[i] * v[i];
        }
    }
    CHECK(noise / signal == Approx(1.0).epsilon(0.05));
}

TEST_CASE("power projection", "[nn]")
{
    std::vector<double> col{3.0, 0.0, 0.0, 4.0}; // X = [3; 4j], N = 2, L = 1
    power_project(col, 2, 1, 1.0);
    CHECK(col[0] == Approx(0.6).epsilon(1e-15));
    CHECK(col[3] == Approx(0.8).epsilon(1e-15));
    auto again = col;
    power_project(again, 2, 1, 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(again[i] - col[i]) < 1e-12);

    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    const std::size_t n = 8, l = 4;
    std::vector<double> x(2 * n * l);
    for (double &v : x)
        v = g(rng);
    auto scaled = x;
    for (double &v : scaled)
        v *= 3.7;
    power_project(x, n, l, 2.0);
    power_project(scaled, n, l, 2.0);
    for (std::size_t j = 0; j < l; ++j)
    {
        double p = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            p += x[k * l + j] * x[k * l + j] + x[n * l + k * l + j] * x[n * l + k * l + j];
        CHECK(p == Approx(2.0).margin(1e-10));
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(x[i] - scaled[i]) < 1e-12);

    std::vector<double> zero(4, 0.0);
    power_project(zero, 2, 1, 1.0);
    CHECK(zero[0] == 1.0);
}

TEST_CASE("checkpoints", "[nn][io]")
{
    NetworkGraph g;
    g.dense("fc", g.input("x", 3), 2, Activation::relu);
    glorot_init(g, 5);
    NetworkGraph h;
    h.dense("fc", h.input("x", 3), 2, Activation::relu);
    decode_parameters(h, encode_parameters(g));
    CHECK(h.parameters()[0].value == g.parameters()[0].value);

    NetworkGraph other;
    other.dense("other", other.input("x", 3), 2);
    CHECK_THROWS_AS(decode_parameters(other, encode_parameters(g)), FormatError);
    auto bytes = encode_parameters(g);
    bytes.resize(bytes.size() - 2);
    CHECK_THROWS_AS(decode_parameters(h, bytes), FormatError);
}

TEST_CASE("graph validation", "[nn]")
{
    NetworkGraph g;
    int x = g.input("x", 4);
    CHECK_THROWS_AS(g.add("bad", x, g.input("y", 3)), std::invalid_argument);
    CHECK_THROWS_AS(g.dense("fc", 99, 2), std::invalid_argument);
    CHECK_THROWS_AS(g.quantize("q", x, 0), std::invalid_argument);
}
