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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pce::nn
{
    double quantize_value(double x, int bits)
    {
        if (std::isnan(x))
            throw NumericError("quantize: NaN input");
        const double levels = std::ldexp(1.0, bits);
        double c = std::clamp(x, 0.0, 1.0);
        double k = std::min(std::floor(c * levels), levels - 1.0);
        return (k + 0.5) / levels;
    }

    NumericArray quantize_ste(const NumericArray &x, int bits)
    {
        if (bits < 1)
            throw std::invalid_argument("quantize: bits must be >= 1");
        NumericArray out = x;
        for (double &v : out.values())
            v = quantize_value(v, bits);
        return out;
    }

    std::uint32_t level_index(double level, int bits)
    {
        const double levels = std::ldexp(1.0, bits);
        double k = level * levels - 0.5;
        if (!(k >= 0.0 && k <= levels - 1.0) || k != std::floor(k))
            throw std::invalid_argument("value " + std::to_string(level) + " is not a " + std::to_string(bits) +
                                        "-bit quantizer midpoint");
        return static_cast<std::uint32_t>(k);
    }

    std::vector<std::uint8_t> encode_codeword(std::span<const double> levels, int bits)
    {
        if (bits < 1 || bits > 24)
            throw std::invalid_argument("encode_codeword: bits must be in [1, 24]");
        std::vector<std::uint8_t> out;
        out.reserve(levels.size() * static_cast<std::size_t>(bits));
        for (double v : levels)
        {
            std::uint32_t k = level_index(v, bits);
            for (int b = bits - 1; b >= 0; --b)
                out.push_back(static_cast<std::uint8_t>((k >> b) & 1u));
        }
        return out;
    }

    std::vector<double> decode_codeword(std::span<const std::uint8_t> bitstring, int bits)
    {
        if (bits < 1 || bits > 24)
            throw std::invalid_argument("decode_codeword: bits must be in [1, 24]");
        if (bitstring.size() % static_cast<std::size_t>(bits) != 0)
            throw std::invalid_argument("decode_codeword: bit count is not a multiple of B");
        const double levels = std::ldexp(1.0, bits);
        std::vector<double> out;
        for (std::size_t i = 0; i < bitstring.size(); i += static_cast<std::size_t>(bits))
        {
            std::uint32_t k = 0;
            for (int b = 0; b < bits; ++b)
            {
                std::uint8_t bit = bitstring[i + static_cast<std::size_t>(b)];
                if (bit > 1)
                    throw std::invalid_argument("decode_codeword: bit values must be 0 or 1");
                k = (k << 1) | bit;
            }
            out.push_back((k + 0.5) / levels);
        }
        return out;
    }

    void awgn_apply(std::span<double> signal, std::optional<double> snr_db, std::mt19937_64 &rng)
    {
        if (signal.empty() || signal.size() % 2 != 0)
            throw std::invalid_argument("awgn: signal must be a non-empty [Re, Im] vector");
        if (!snr_db.has_value() || (std::isinf(*snr_db) && *snr_db > 0))
            return;
        if (std::isnan(*snr_db))
            throw std::invalid_argument("awgn: SNR is NaN");
        const double len = static_cast<double>(signal.size() / 2);
        double power = 0.0;
        for (double v : signal)
        {
            if (!std::isfinite(v))
                throw NumericError("awgn: non-finite signal");
            power += v * v;
        }
        double sigma2 = power / len / std::pow(10.0, *snr_db / 10.0);
        double sd = std::sqrt(sigma2 / 2.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double &v : signal)
            v += sd * normal(rng);
    }

    std::vector<double> awgn_apply(std::span<const double> signal, std::optional<double> snr_db, std::uint64_t seed)
    {
        std::vector<double> out(signal.begin(), signal.end());
        std::mt19937_64 rng(seed);
        awgn_apply(out, snr_db, rng);
        return out;
    }

    void power_project(std::span<double> w, std::size_t n, std::size_t L, double power)
    {
        if (!(power > 0.0))
            throw std::invalid_argument("power_project: P must be > 0");
        if (w.size() != 2 * n * L)
            throw std::invalid_argument("power_project: expected 2*N*L values");
        const double s = std::sqrt(power);
        for (std::size_t c = 0; c < L; ++c)
        {
            double norm2 = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                norm2 += w[k * L + c] * w[k * L + c] + w[n * L + k * L + c] * w[n * L + k * L + c];
            if (norm2 == 0.0)
            {
                w[c] = s; // sqrt(P) e_0
                continue;
            }
            double f = s / std::sqrt(norm2);
            for (std::size_t k = 0; k < n; ++k)
            {
                w[k * L + c] *= f;
                w[n * L + k * L + c] *= f;
            }
        }
    }

    void glorot_init(NetworkGraph &graph, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        for (auto &p : graph.parameters())
        {
            if (p.fan_in == 0)
            {
                std::fill(p.value.values().begin(), p.value.values().end(), 0.0);
                continue;
            }
            const double limit = std::sqrt(6.0 / static_cast<double>(p.fan_in + p.fan_out));
            std::uniform_real_distribution<double> uni(-limit, limit);
            for (double &v : p.value.values())
            {
                float f = static_cast<float>(uni(rng));
                if (std::abs(static_cast<double>(f)) > limit)
                    f = std::nextafter(f, 0.0f);
                v = f;
            }
        }
    }

    AdamState make_adam(const std::vector<Parameter> &params, double lr)
    {
        AdamState s;
        s.lr = lr;
        for (const auto &p : params)
        {
            s.m.emplace_back(p.value.shape(), 0.0);
            s.v.emplace_back(p.value.shape(), 0.0);
        }
        return s;
    }

    void adam_step(AdamState &s, std::vector<Parameter> &params, const std::vector<NumericArray> &grads)
    {
        if (grads.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size())
            throw std::invalid_argument("adam_step: parameter, gradient and moment counts differ");
        for (std::size_t i = 0; i < params.size(); ++i)
            if (grads[i].shape() != params[i].value.shape() || s.m[i].shape() != params[i].value.shape())
                throw std::invalid_argument("adam_step: shape mismatch for parameter '" + params[i].name + "'");

        ++s.step;
        const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
        const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
        for (std::size_t i = 0; i < params.size(); ++i)
        {
            if (!params[i].trainable)
                continue;
            auto &theta = params[i].value.values();
            auto &m = s.m[i].values();
            auto &v = s.v[i].values();
            const auto &g = grads[i].values();
            for (std::size_t k = 0; k < theta.size(); ++k)
            {
                m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * g[k];
                v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * g[k] * g[k];
                double mhat = m[k] / c1;
                double vhat = v[k] / c2;
                theta[k] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
            }
            params[i].value.check_finite("adam update of '" + params[i].name + "'");
        }
    }
}
