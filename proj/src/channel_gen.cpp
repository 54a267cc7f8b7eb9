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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pce
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        // Angle of `target` seen from `origin`, relative to `broadside`, folded
        // onto [-pi/2, pi/2] (a ULA cannot tell front from back).
        double departure_angle(Point2 origin, Point2 target, double broadside)
        {
            double az = std::atan2(target.y - origin.y, target.x - origin.x);
            return std::asin(std::clamp(std::sin(az - broadside), -1.0, 1.0));
        }

        cd path_gain(double amplitude, double length, double wavelength)
        {
            double phase = -2.0 * pi * std::fmod(length / wavelength, 1.0);
            return std::polar(amplitude, phase);
        }
    }

    double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

    void ScenarioConfig::validate() const
    {
        auto fail = [](const std::string &field, const std::string &why)
        { throw std::invalid_argument("invalid scenario field '" + field + "': " + why); };

        if (bs_positions.size() < 2)
            fail("bs_positions", "at least two base stations (main, side) are required");
        for (std::size_t i = 0; i < bs_positions.size(); ++i)
        {
            if (!std::isfinite(bs_positions[i].x) || !std::isfinite(bs_positions[i].y))
                fail("bs_positions", "non-finite coordinate");
            for (std::size_t j = 0; j < i; ++j)
                if (bs_positions[i] == bs_positions[j])
                    fail("bs_positions", "base stations " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
        }
        if (!bs_broadside_deg.empty() && bs_broadside_deg.size() != bs_positions.size())
            fail("bs_broadside_deg", "must be empty or have one entry per base station");
        if (antennas < 1)
            fail("antennas", "must be >= 1");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            fail("wavelength", "must be > 0");
        if (!(tx_power > 0.0) || !std::isfinite(tx_power))
            fail("tx_power", "must be > 0");
        if (!(grid.spacing > 0.0) || !std::isfinite(grid.spacing))
            fail("grid.spacing", "must be > 0");
        if (grid.rows < 1 || grid.cols < 1)
            fail("grid.rows/grid.cols", "grid must hold at least one UE");
        if (!(reflection_loss >= 0.0) || !std::isfinite(reflection_loss))
            fail("reflection_loss", "must be >= 0");
        if (max_paths < 0)
            fail("max_paths", "must be >= 0");
        if (split.train < 0 || split.val < 0 || split.test < 0 ||
            std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
            fail("split", "fractions must be non-negative and sum to 1");
    }

    double ScenarioConfig::broadside(std::size_t index) const
    {
        if (!bs_broadside_deg.empty())
            return bs_broadside_deg.at(index) * pi / 180.0;
        Point2 c = grid_centroid();
        Point2 b = bs_positions.at(index);
        return std::atan2(c.y - b.y, c.x - b.x);
    }

    Point2 ScenarioConfig::grid_position(int row, int col) const
    {
        double x = grid.origin.x + col * grid.spacing;
        double y = grid.origin.y + row * grid.spacing;
        return {static_cast<float>(x), static_cast<float>(y)};
    }

    Point2 ScenarioConfig::grid_centroid() const
    {
        return {grid.origin.x + 0.5 * (grid.cols - 1) * grid.spacing,
                grid.origin.y + 0.5 * (grid.rows - 1) * grid.spacing};
    }

    double ScenarioConfig::grid_diagonal() const
    {
        return std::hypot((grid.cols - 1) * grid.spacing, (grid.rows - 1) * grid.spacing);
    }

    CVector steering_vector(double theta, int antennas)
    {
        if (!std::isfinite(theta))
            throw std::invalid_argument("steering_vector: non-finite angle");
        if (antennas < 1)
            throw std::invalid_argument("steering_vector: antenna count must be >= 1");
        CVector a(static_cast<std::size_t>(antennas));
        double s = std::sin(theta);
        for (int k = 0; k < antennas; ++k)
            a[k] = std::polar(1.0, pi * k * s);
        return a;
    }

    std::vector<PropagationPath> synthesize_paths(const ScenarioConfig &config, std::size_t bs_index, Point2 ue)
    {
        if (bs_index >= config.bs_positions.size())
            throw std::invalid_argument("synthesize_paths: bs_index " + std::to_string(bs_index) + " out of range");
        const Point2 bs = config.bs_positions[bs_index];
        const double horizontal = distance(bs, ue);
        if (horizontal == 0.0)
            throw std::invalid_argument("synthesize_paths: UE coincides with base station " + std::to_string(bs_index) +
                                        " (zero distance)");
        const double dh = config.bs_height - config.ue_height;
        const double lambda = config.wavelength;
        const double broadside = config.broadside(bs_index);

        std::vector<PropagationPath> paths;
        double d = std::hypot(horizontal, dh);
        paths.push_back({departure_angle(bs, ue, broadside), path_gain(lambda / (4.0 * pi * d), d, lambda)});

        // Scatterers sit at UE height: the height offset enters the BS leg only.
        std::vector<PropagationPath> nlos;
        for (const Point2 &s : config.scatterers)
        {
            double d1 = std::hypot(distance(bs, s), dh);
            double d2 = distance(s, ue);
            double len = d1 + d2;
            double amp = config.reflection_loss * lambda / (4.0 * pi * len);
            if (amp <= 0.0 || distance(bs, s) == 0.0)
                continue;
            nlos.push_back({departure_angle(bs, s, broadside), path_gain(amp, len, lambda)});
        }
        std::stable_sort(nlos.begin(), nlos.end(), [](const PropagationPath &a, const PropagationPath &b)
                         { return std::abs(a.gain) > std::abs(b.gain); });
        if (nlos.size() > static_cast<std::size_t>(config.max_paths))
            nlos.resize(static_cast<std::size_t>(config.max_paths));
        paths.insert(paths.end(), nlos.begin(), nlos.end());
        return paths;
    }

    CVector channel_from_paths(std::span<const PropagationPath> paths, int antennas)
    {
        if (paths.empty())
            throw std::invalid_argument("channel_from_paths: empty path list");
        CVector h(static_cast<std::size_t>(antennas), cd(0.0, 0.0));
        for (const PropagationPath &p : paths)
        {
            CVector a = steering_vector(p.departure_angle, antennas);
            for (int k = 0; k < antennas; ++k)
                h[k] += p.gain * a[k];
        }
        return h;
    }

    CVector raw_channel(const ScenarioConfig &config, std::size_t bs_index, Point2 ue)
    {
        auto paths = synthesize_paths(config, bs_index, ue);
        return channel_from_paths(paths, config.antennas);
    }

    std::vector<double> angular_transform(std::span<const cd> h)
    {
        const std::size_t n = h.size();
        if (n == 0)
            throw std::invalid_argument("angular_transform: empty channel");
        // (F^H h)_k = n^{-1/2} sum_m h_m exp(+j 2 pi k m / n); the magnitude is
        // the same for either DFT sign convention.
        std::vector<double> out(n);
        const double norm = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k)
        {
            cd acc(0.0, 0.0);
            for (std::size_t m = 0; m < n; ++m)
            {
                // Reduce k*m mod n before scaling keeps the phase argument small.
                double frac = static_cast<double>((k * m) % n) / static_cast<double>(n);
                acc += h[m] * std::polar(1.0, 2.0 * pi * frac);
            }
            out[k] = std::abs(acc) * norm;
        }
        return out;
    }

    const char *split_name(Split s)
    {
        switch (s)
        {
        case Split::train:
            return "train";
        case Split::val:
            return "val";
        case Split::test:
            return "test";
        }
        return "?";
    }

    Split parse_split(const std::string &name)
    {
        if (name == "train")
            return Split::train;
        if (name == "val")
            return Split::val;
        if (name == "test")
            return Split::test;
        throw std::invalid_argument("unknown split '" + name + "' (expected train, val or test)");
    }

    std::vector<std::size_t> Dataset::indices(Split s) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == s)
                out.push_back(i);
        return out;
    }

    std::size_t Dataset::count(Split s) const
    {
        return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
    }

    SplitCounts split_counts(std::size_t total, const SplitFractions &f)
    {
        SplitCounts c;
        c.train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(total) + 1e-9));
        c.val = static_cast<std::size_t>(std::floor(f.val * static_cast<double>(total) + 1e-9));
        c.train = std::min(c.train, total);
        c.val = std::min(c.val, total - c.train);
        c.test = total - c.train - c.val;
        return c;
    }

    namespace
    {
        ChannelSample make_sample(Point2 p, const CVector &hm, const CVector &hs,
                                  double scale)
        {
            ChannelSample s;
            s.position = {static_cast<float>(p.x), static_cast<float>(p.y)};
            s.h_main.resize(hm.size());
            s.h_side.resize(hs.size());
            for (std::size_t k = 0; k < hm.size(); ++k)
            {
                s.h_main[k] = {static_cast<float>(hm[k].real() * scale), static_cast<float>(hm[k].imag() * scale)};
                s.h_side[k] = {static_cast<float>(hs[k].real() * scale), static_cast<float>(hs[k].imag() * scale)};
            }
            return s;
        }

        Point2 index_position(const ScenarioConfig &config, std::size_t index)
        {
            int cols = config.grid.cols;
            return config.grid_position(static_cast<int>(index / cols), static_cast<int>(index % cols));
        }
    }

    ChannelSample regenerate_sample(const ScenarioConfig &config, std::size_t index, double norm_scale)
    {
        Point2 p = index_position(config, index);
        return make_sample(p, raw_channel(config, 0, p), raw_channel(config, 1, p), norm_scale);
    }

    Dataset generate_dataset(const ScenarioConfig &config)
    {
        config.validate();
        const std::size_t total = static_cast<std::size_t>(config.grid.rows) * static_cast<std::size_t>(config.grid.cols);

        std::vector<CVector> hm(total), hs(total);
        std::vector<Point2> pos(total);
        for (std::size_t i = 0; i < total; ++i)
        {
            pos[i] = index_position(config, i);
            hm[i] = raw_channel(config, 0, pos[i]);
            hs[i] = raw_channel(config, 1, pos[i]);
        }

        Dataset ds;
        ds.antennas = config.antennas;
        ds.split.assign(total, Split::train);
        std::vector<std::size_t> perm(total);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::mt19937_64 rng(config.env_seed);
        std::shuffle(perm.begin(), perm.end(), rng);
        SplitCounts counts = split_counts(total, config.split);
        for (std::size_t r = 0; r < total; ++r)
            ds.split[perm[r]] = r < counts.train ? Split::train : (r < counts.train + counts.val ? Split::val : Split::test);

        // Global scale: unit average per-antenna power of the training main
        // channels (all samples when the training split is empty).
        double power = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < total; ++i)
        {
            if (counts.train > 0 && ds.split[i] != Split::train)
                continue;
            for (const cd &v : hm[i])
                power += std::norm(v);
            ++used;
        }
        power /= static_cast<double>(used) * config.antennas;
        ds.norm_scale = 1.0 / std::sqrt(power);

        ds.samples.reserve(total);
        for (std::size_t i = 0; i < total; ++i)
            ds.samples.push_back(make_sample(pos[i], hm[i], hs[i], ds.norm_scale));
        return ds;
    }

    CVector to_cvector(std::span<const std::complex<float>> h)
    {
        CVector out(h.size());
        for (std::size_t k = 0; k < h.size(); ++k)
            out[k] = {h[k].real(), h[k].imag()};
        return out;
    }

    std::string fnv1a_hex(std::span<const unsigned char> bytes)
    {
        std::uint64_t hash = 0xcbf29ce484222325ULL;
        for (unsigned char b : bytes)
        {
            hash ^= b;
            hash *= 0x100000001b3ULL;
        }
        static const char *digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i, hash >>= 4)
            out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        return out;
    }

    std::string dataset_hash(const Dataset &dataset)
    {
        auto bytes = encode_dataset(dataset);
        return fnv1a_hex(bytes);
    }
}
