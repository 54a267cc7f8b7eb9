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

#include "pcenet/oracles.hpp"

#include "pcenet/e2e_csi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

namespace pce
{
    namespace
    {
        using clock = std::chrono::steady_clock;

        double seconds_since(clock::time_point t0)
        {
            return std::chrono::duration<double>(clock::now() - t0).count();
        }

        std::string sci(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3e", v);
            return buf;
        }

        nn::NumericArray random_array(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, double lo = -1.0,
                                      double hi = 1.0)
        {
            std::uniform_real_distribution<double> u(lo, hi);
            nn::NumericArray a = nn::NumericArray::matrix(rows, cols);
            for (double &v : a.values())
                v = u(rng);
            return a;
        }

        // Moves entries away from the ReLU kink so the central difference is smooth.
        void avoid_kink(nn::NumericArray &a, std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> u(0.05, 1.0);
            std::bernoulli_distribution sign(0.5);
            for (double &v : a.values())
                if (std::abs(v) < 0.05)
                    v = sign(rng) ? u(rng) : -u(rng);
        }

        double loss(const nn::NetworkGraph &g, const std::vector<nn::NumericArray> &in, const nn::NumericArray &w)
        {
            nn::NumericArray y = nn::forward(g, in).output();
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i)
                s += y[i] * w[i];
            return s;
        }

        // Relative error of the analytic gradient over all inputs and parameters.
        double gradient_error(nn::NetworkGraph &g, std::vector<nn::NumericArray> in, std::mt19937_64 &rng)
        {
            nn::Activations cache = nn::forward(g, in);
            nn::NumericArray w = random_array(cache.output().rows(), cache.output().cols(), rng);
            nn::Gradients grads = nn::backward(g, cache, w);

            double diff = 0.0, na = 0.0, nf = 0.0;
            auto accumulate = [&](double analytic, double numeric)
            {
                diff += (analytic - numeric) * (analytic - numeric);
                na += analytic * analytic;
                nf += numeric * numeric;
            };
            const double h = kGradientFdStep;
            for (std::size_t k = 0; k < in.size(); ++k)
                for (std::size_t i = 0; i < in[k].size(); ++i)
                {
                    const double x0 = in[k][i];
                    in[k][i] = x0 + h;
                    double lp = loss(g, in, w);
                    in[k][i] = x0 - h;
                    double lm = loss(g, in, w);
                    in[k][i] = x0;
                    accumulate(grads.inputs[k][i], (lp - lm) / (2.0 * h));
                }
            for (std::size_t p = 0; p < g.parameters().size(); ++p)
            {
                auto &vals = g.parameters()[p].value.values();
                for (std::size_t i = 0; i < vals.size(); ++i)
                {
                    const double x0 = vals[i];
                    vals[i] = x0 + h;
                    double lp = loss(g, in, w);
                    vals[i] = x0 - h;
                    double lm = loss(g, in, w);
                    vals[i] = x0;
                    accumulate(grads.params[p][i], (lp - lm) / (2.0 * h));
                }
            }
            double scale = std::max({std::sqrt(na), std::sqrt(nf), 1e-12});
            return std::sqrt(diff) / scale;
        }

        struct Case
        {
            std::string kind;
            std::function<double(std::mt19937_64 &)> run;
        };

        std::size_t draw(std::mt19937_64 &rng, std::size_t lo, std::size_t hi)
        {
            return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
        }

        std::vector<Case> gradient_cases()
        {
            std::vector<Case> cases;
            auto dense = [](bool bias)
            {
                return [bias](std::mt19937_64 &rng)
                {
                    std::size_t b = draw(rng, 1, 4), in = draw(rng, 1, 6), out = draw(rng, 1, 6);
                    nn::NetworkGraph g;
                    g.dense("fc", g.input("x", in), out, bias);
                    nn::glorot_init(g, rng());
                    if (bias)
                        g.parameter("fc.bias").value.values() = random_array(1, out, rng).values();
                    return gradient_error(g, {random_array(b, in, rng)}, rng);
                };
            };
            cases.push_back({"dense", dense(true)});
            cases.push_back({"dense_no_bias", dense(false)});
            for (auto [name, act] : {std::pair{"tanh", nn::Activation::tanh}, std::pair{"sigmoid", nn::Activation::sigmoid},
                                     std::pair{"relu", nn::Activation::relu}})
            {
                nn::Activation a = act;
                cases.push_back({name,
                                 [a](std::mt19937_64 &rng)
                                 {
                                     std::size_t b = draw(rng, 1, 4), w = draw(rng, 1, 8);
                                     nn::NetworkGraph g;
                                     g.activation("act", g.input("x", w), a);
                                     nn::NumericArray x = random_array(b, w, rng, -3.0, 3.0);
                                     if (a == nn::Activation::relu)
                                         avoid_kink(x, rng);
                                     return gradient_error(g, {x}, rng);
                                 }});
            }
            cases.push_back({"concat",
                             [](std::mt19937_64 &rng)
                             {
                                 std::size_t b = draw(rng, 1, 4), w1 = draw(rng, 1, 5), w2 = draw(rng, 1, 5);
                                 nn::NetworkGraph g;
                                 int x = g.input("x", w1), y = g.input("y", w2);
                                 g.concat("cat", {x, y});
                                 return gradient_error(g, {random_array(b, w1, rng), random_array(b, w2, rng)}, rng);
                             }});
            cases.push_back({"add",
                             [](std::mt19937_64 &rng)
                             {
                                 std::size_t b = draw(rng, 1, 4), w = draw(rng, 1, 6);
                                 nn::NetworkGraph g;
                                 int x = g.input("x", w), y = g.input("y", w);
                                 g.add("sum", x, y);
                                 return gradient_error(g, {random_array(b, w, rng), random_array(b, w, rng)}, rng);
                             }});
            cases.push_back({"power_project",
                             [](std::mt19937_64 &rng)
                             {
                                 std::size_t b = draw(rng, 1, 3), n = draw(rng, 1, 5), l = draw(rng, 1, 4);
                                 double p = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
                                 nn::NetworkGraph g;
                                 g.power_project("proj", g.input("x", 2 * n * l), n, l, p);
                                 return gradient_error(g, {random_array(b, 2 * n * l, rng)}, rng);
                             }});
            cases.push_back({"pilot",
                             [](std::mt19937_64 &rng)
                             {
                                 std::size_t b = draw(rng, 1, 3), n = draw(rng, 1, 5), l = draw(rng, 1, 4);
                                 nn::NetworkGraph g;
                                 g.pilot("pilot", g.input("h", 2 * n), n, l);
                                 nn::glorot_init(g, rng());
                                 return gradient_error(g, {random_array(b, 2 * n, rng)}, rng);
                             }});
            cases.push_back({"transmit",
                             [](std::mt19937_64 &rng)
                             {
                                 std::size_t b = draw(rng, 1, 3), n = draw(rng, 1, 5), l = draw(rng, 1, 4);
                                 nn::NetworkGraph g;
                                 int h = g.input("h", 2 * n), x = g.input("x", 2 * n * l);
                                 g.transmit("rx", h, x, n, l);
                                 return gradient_error(g, {random_array(b, 2 * n, rng), random_array(b, 2 * n * l, rng)},
                                                       rng);
                             }});
            return cases;
        }

        // Upstream gradient must come back unchanged.
        bool passes_through(nn::NetworkGraph &g, const nn::NumericArray &x, std::mt19937_64 &rng)
        {
            nn::ForwardOptions opts;
            opts.mode = nn::Mode::train;
            opts.rng = &rng;
            opts.snr_override_db = 0.0;
            nn::Activations cache = nn::forward(g, std::span<const nn::NumericArray>(&x, 1), opts);
            nn::NumericArray w = random_array(x.rows(), cache.output().cols(), rng);
            nn::Gradients grads = nn::backward(g, cache, w);
            return grads.inputs.at(0).values() == w.values();
        }
    }

    OracleResult gradient_oracle(std::uint64_t seed, int instances)
    {
        auto t0 = clock::now();
        OracleResult r{1, "gradient oracle", true, "", 0};
        std::mt19937_64 rng(seed);
        for (const Case &c : gradient_cases())
        {
            double worst = 0.0;
            for (int i = 0; i < instances; ++i)
                worst = std::max(worst, c.run(rng));
            bool ok = worst < kGradientRelTol;
            r.pass = r.pass && ok;
            r.detail += c.kind + " " + sci(worst) + (ok ? "" : " (FAIL)") + "; ";
        }
        int exact = 0, total = 0;
        for (int i = 0; i < instances; ++i)
        {
            std::size_t b = draw(rng, 1, 4), w = 2 * draw(rng, 1, 8);
            int bits = static_cast<int>(draw(rng, 1, 8));
            nn::NetworkGraph q;
            q.quantize("q", q.input("x", w), bits);
            nn::NetworkGraph a;
            a.awgn("awgn", a.input("x", w), {0.0, true});
            exact += passes_through(q, random_array(b, w, rng, -0.5, 1.5), rng);
            exact += passes_through(a, random_array(b, w, rng), rng);
            total += 2;
        }
        r.pass = r.pass && exact == total;
        r.detail += "quantize/awgn pass-through exact " + std::to_string(exact) + "/" + std::to_string(total);
        r.seconds = seconds_since(t0);
        return r;
    }

    OracleResult complex_oracle(std::uint64_t seed, int cases)
    {
        auto t0 = clock::now();
        OracleResult r{2, "complex-arithmetic oracle", true, "", 0};
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        double worst_rx = 0.0, worst_dft = 0.0;
        for (int c = 0; c < cases; ++c)
        {
            std::size_t n = draw(rng, 1, 16), l = draw(rng, 1, 8);
            CVector h(n);
            for (auto &v : h)
                v = {g(rng), g(rng)};
            PilotMatrix x{n, l, std::vector<cd>(n * l)};
            for (auto &v : x.values)
                v = {g(rng), g(rng)};

            CVector y = simulate_pilot_reception(h, x, std::nullopt, rng());
            for (std::size_t j = 0; j < l; ++j)
            {
                cd acc = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    acc += h[k] * x.values[k * l + j];
                worst_rx = std::max(worst_rx, std::abs(acc - y.at(j)));
            }

            std::vector<double> a = angular_transform(h);
            for (std::size_t k = 0; k < n; ++k)
            {
                cd acc = 0.0;
                for (std::size_t m = 0; m < n; ++m)
                    acc += h[m] * std::exp(cd(0.0, 2.0 * std::numbers::pi * static_cast<double>(k * m) /
                                                        static_cast<double>(n)));
                worst_dft = std::max(worst_dft, std::abs(std::abs(acc) / std::sqrt(static_cast<double>(n)) - a[k]));
            }
        }
        r.pass = worst_rx <= kReceptionAbsTol && worst_dft <= kDftAbsTol;
        r.detail = "reception max err " + sci(worst_rx) + " (tol " + sci(kReceptionAbsTol) + "), angular max err " +
                   sci(worst_dft) + " (tol " + sci(kDftAbsTol) + ") over " + std::to_string(cases) + " cases";
        r.seconds = seconds_since(t0);
        return r;
    }

    OracleResult quantizer_oracle(std::uint64_t seed)
    {
        auto t0 = clock::now();
        OracleResult r{3, "quantizer contract", true, "", 0};
        std::mt19937_64 rng(seed);
        for (int bits : {1, 2, 4, 8})
        {
            const double bound = std::ldexp(1.0, -(bits + 1));
            double worst = 0.0;
            // Grid over [-0.25, 1.25] so both clamping branches are exercised.
            const std::size_t pts = kQuantizerGridPoints;
            for (std::size_t i = 0; i < pts; ++i)
            {
                double x = -0.25 + 1.5 * static_cast<double>(i) / static_cast<double>(pts - 1);
                worst = std::max(worst, std::abs(nn::quantize_value(x, bits) - std::clamp(x, 0.0, 1.0)));
            }
            bool ok = worst <= bound;

            // Every level, then random codewords, must survive encode/decode.
            const std::uint32_t levels = 1u << bits;
            std::vector<double> all(levels);
            for (std::uint32_t k = 0; k < levels; ++k)
                all[k] = (k + 0.5) / levels;
            ok = ok && nn::decode_codeword(nn::encode_codeword(all, bits), bits) == all;
            std::bernoulli_distribution coin(0.5);
            for (int t = 0; t < 100; ++t)
            {
                std::vector<std::uint8_t> word(static_cast<std::size_t>(bits) * draw(rng, 1, 16));
                for (auto &b : word)
                    b = coin(rng);
                ok = ok && nn::encode_codeword(nn::decode_codeword(word, bits), bits) == word;
            }
            r.pass = r.pass && ok;
            r.detail += "B=" + std::to_string(bits) + " max err " + sci(worst) + " (bound " + sci(bound) + ")" +
                        (ok ? "" : " FAIL") + "; ";
        }
        r.detail += r.pass ? "codeword round trips exact" : "codeword round trip or bound violated";
        r.seconds = seconds_since(t0);
        return r;
    }

    std::vector<OracleResult> run_selftest(std::uint64_t seed)
    {
        return {gradient_oracle(seed), complex_oracle(seed), quantizer_oracle(seed)};
    }
}
