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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace pce
{
    PositionScaler PositionScaler::from_positions(std::span<const Point2> positions)
    {
        if (positions.empty())
            throw std::invalid_argument("PositionScaler: no positions");
        BoundingBox b = BoundingBox::around(positions, 0.0);
        PositionScaler s;
        s.centroid = {0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax)};
        s.half_diagonal = 0.5 * std::hypot(b.xmax - b.xmin, b.ymax - b.ymin);
        if (!(s.half_diagonal > 0.0))
            s.half_diagonal = 1.0; // a single position: translation only
        return s;
    }

    PositionScaler PositionScaler::from_dataset(const Dataset &ds)
    {
        std::vector<std::size_t> all(ds.samples.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        auto p = dataset_positions(ds, all);
        return from_positions(p);
    }

    Point2 PositionScaler::standardize(Point2 p) const
    {
        return {(p.x - centroid.x) / half_diagonal, (p.y - centroid.y) / half_diagonal};
    }

    Point2 PositionScaler::restore(Point2 s) const
    {
        return {s.x * half_diagonal + centroid.x, s.y * half_diagonal + centroid.y};
    }

    nn::NumericArray PositionScaler::standardize_rows(std::span<const Point2> positions) const
    {
        nn::NumericArray out = nn::NumericArray::matrix(positions.size(), 2);
        for (std::size_t i = 0; i < positions.size(); ++i)
        {
            Point2 s = standardize(positions[i]);
            out.at(i, 0) = s.x;
            out.at(i, 1) = s.y;
        }
        return out;
    }

    BoundingBox BoundingBox::around(std::span<const Point2> positions, double margin)
    {
        if (positions.empty())
            throw std::invalid_argument("BoundingBox: no positions");
        BoundingBox b{positions[0].x, positions[0].x, positions[0].y, positions[0].y};
        for (const Point2 &p : positions)
        {
            b.xmin = std::min(b.xmin, p.x);
            b.xmax = std::max(b.xmax, p.x);
            b.ymin = std::min(b.ymin, p.y);
            b.ymax = std::max(b.ymax, p.y);
        }
        const double dx = margin * (b.xmax - b.xmin), dy = margin * (b.ymax - b.ymin);
        b.xmin -= dx;
        b.xmax += dx;
        b.ymin -= dy;
        b.ymax += dy;
        return b;
    }

    bool BoundingBox::contains(Point2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }

    std::vector<Point2> dataset_positions(const Dataset &ds, std::span<const std::size_t> idx)
    {
        std::vector<Point2> p;
        p.reserve(idx.size());
        for (std::size_t i : idx)
            p.push_back(ds.samples.at(i).point());
        return p;
    }

    nn::NetworkGraph build_localizer(int antennas, std::uint64_t seed)
    {
        if (antennas < 1)
            throw std::invalid_argument("build_localizer: N must be >= 1");
        const auto n = static_cast<std::size_t>(antennas);
        nn::NetworkGraph g;
        int x = g.input("h", 2 * n);
        for (int k = 1; k <= 3; ++k)
            x = g.dense("loc" + std::to_string(k), x, 8 * n, nn::Activation::relu);
        g.set_output(g.dense("position", x, 2));
        nn::glorot_init(g, seed);
        g.round_parameters_to_float();
        return g;
    }

    std::size_t localizer_parameter_count(int antennas)
    {
        const auto n = static_cast<std::size_t>(antennas);
        return (2 * n * 8 * n + 8 * n) + 2 * (8 * n * 8 * n + 8 * n) + (8 * n * 2 + 2);
    }

    namespace
    {
        void check_set(const LocalizationSet &s, const char *what)
        {
            if (s.channels.rows() != s.positions.size())
                throw std::invalid_argument(std::string(what) + ": channel and position counts differ");
        }
    }

    TrainHistory train_localizer(nn::NetworkGraph &graph, const LocalizationSet &train, const LocalizationSet &val,
                                 const PositionScaler &scaler, const TrainConfig &config)
    {
        if (train.size() == 0)
            throw std::invalid_argument("train_localizer: empty training set");
        check_set(train, "train_localizer");
        check_set(val, "train_localizer");
        SupervisedSet t{{train.channels}, scaler.standardize_rows(train.positions)};
        SupervisedSet v;
        if (val.size() > 0)
            v = {{val.channels}, scaler.standardize_rows(val.positions)};
        TrainConfig cfg = config;
        cfg.train_snr_db.reset();
        return fit(graph, t, v, cfg, Metric::mse);
    }

    std::vector<Point2> localize(const nn::NetworkGraph &graph, const nn::NumericArray &channels,
                                 const PositionScaler &scaler)
    {
        nn::NumericArray out = predict(graph, std::span<const nn::NumericArray>(&channels, 1));
        if (out.cols() != 2)
            throw std::invalid_argument("localize: graph output width must be 2");
        std::vector<Point2> p(out.rows());
        for (std::size_t r = 0; r < out.rows(); ++r)
            p[r] = scaler.restore({out.at(r, 0), out.at(r, 1)});
        return p;
    }

    Point2 localize(const nn::NetworkGraph &graph, std::span<const cd> channel, const PositionScaler &scaler)
    {
        const std::size_t n = channel.size();
        nn::NumericArray row = nn::NumericArray::matrix(1, 2 * n);
        for (std::size_t k = 0; k < n; ++k)
        {
            row.at(0, k) = channel[k].real();
            row.at(0, n + k) = channel[k].imag();
        }
        return localize(graph, row, scaler).front();
    }

    void LocalizationReport::write_csv(std::ostream &os) const
    {
        os << "sample,error_m\n";
        char buf[64];
        for (std::size_t i = 0; i < errors.size(); ++i)
        {
            std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i, errors[i]);
            os << buf;
        }
    }

    LocalizationReport localization_report(std::span<const Point2> estimates, std::span<const Point2> truth,
                                           const BoundingBox &box)
    {
        if (estimates.size() != truth.size())
            throw std::invalid_argument("localization_report: estimate and truth counts differ");
        LocalizationReport r;
        for (std::size_t i = 0; i < estimates.size(); ++i)
        {
            if (!std::isfinite(estimates[i].x) || !std::isfinite(estimates[i].y))
                throw NumericError("localization_report: non-finite estimate at sample " + std::to_string(i));
            r.errors.push_back(distance(estimates[i], truth[i]));
            if (!box.contains(estimates[i]))
                ++r.outside_box;
        }
        if (r.outside_box > 0)
            warn(std::to_string(r.outside_box) + " position estimate(s) outside the plausibility box");
        r.sorted = r.errors;
        std::sort(r.sorted.begin(), r.sorted.end());
        if (!r.errors.empty())
            r.mean = std::accumulate(r.errors.begin(), r.errors.end(), 0.0) / static_cast<double>(r.errors.size());
        return r;
    }

    LocalizationReport localization_report(std::span<const Point2> estimates, std::span<const Point2> truth)
    {
        if (truth.empty())
            return localization_report(estimates, truth, BoundingBox{});
        return localization_report(estimates, truth, BoundingBox::around(truth, 0.5));
    }

    double error_cdf(const LocalizationReport &report, double q)
    {
        if (report.sorted.empty())
            throw std::invalid_argument("error_cdf: empty report");
        if (!(q >= 0.0 && q <= 1.0))
            throw std::invalid_argument("error_cdf: quantile must lie in [0, 1]");
        const double pos = q * static_cast<double>(report.sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, report.sorted.size() - 1);
        const double f = pos - static_cast<double>(lo);
        return report.sorted[lo] + f * (report.sorted[hi] - report.sorted[lo]);
    }

    namespace
    {
        ChartingPair build_pair(int antennas, std::uint64_t seed, int blocks, std::size_t out_width)
        {
            if (antennas < 1)
                throw std::invalid_argument("charting pair: N must be >= 1");
            if (blocks < 1)
                throw std::invalid_argument("charting pair: residual_blocks must be >= 1");
            const auto n = static_cast<std::size_t>(antennas);
            ChartingPair p;
            int x = p.encoder.input("h", 2 * n);
            for (int k = 1; k <= 3; ++k)
                x = p.encoder.dense("enc" + std::to_string(k), x, 4 * n, nn::Activation::relu);
            p.encoder.set_output(p.encoder.dense("latent", x, 2, nn::Activation::sigmoid));

            int s = p.decoder.input("latent", 2);
            p.decoder.set_output(add_reconstruction(p.decoder, s, antennas, blocks, "dec.", out_width));

            nn::glorot_init(p.encoder, seed);
            nn::glorot_init(p.decoder, seed + 1);
            p.encoder.round_parameters_to_float();
            p.decoder.round_parameters_to_float();
            return p;
        }
    }

    ChartingPair build_charting_pair(int antennas, std::uint64_t seed, int residual_blocks)
    {
        return build_pair(antennas, seed, residual_blocks, static_cast<std::size_t>(antennas));
    }

    ChartingPair build_vanilla_autoencoder(int antennas, std::uint64_t seed, int residual_blocks)
    {
        return build_pair(antennas, seed, residual_blocks, 2 * static_cast<std::size_t>(antennas));
    }

    std::size_t charting_parameter_count(int antennas, int residual_blocks, std::size_t decoder_out)
    {
        const auto n = static_cast<std::size_t>(antennas);
        std::size_t enc = (2 * n * 4 * n + 4 * n) + 2 * (4 * n * 4 * n + 4 * n) + (4 * n * 2 + 2);
        std::size_t block = (2 * n * 8 * n + 8 * n) + (8 * n * 2 * n + 2 * n);
        std::size_t dec = (2 * 2 * n + 2 * n) + static_cast<std::size_t>(residual_blocks) * block +
                          (2 * n * decoder_out + decoder_out);
        return enc + dec;
    }

    nn::NumericArray angular_rows(const Dataset &ds, std::span<const std::size_t> idx, ChannelSelector which)
    {
        const auto n = static_cast<std::size_t>(ds.antennas);
        nn::NumericArray out = nn::NumericArray::matrix(idx.size(), n);
        for (std::size_t r = 0; r < idx.size(); ++r)
        {
            const auto &s = ds.samples.at(idx[r]);
            auto a = angular_transform(to_cvector(which == ChannelSelector::main ? s.h_main : s.h_side));
            std::copy(a.begin(), a.end(), out.row(r).begin());
        }
        return out;
    }

    namespace
    {
        TrainHistory fit_pair(ChartingPair &pair, const SupervisedSet &train, const SupervisedSet &val,
                              const TrainConfig &config)
        {
            const std::size_t width = pair.decoder.output_width();
            if (train.target.cols() != width || (val.size() > 0 && val.target.cols() != width))
                throw std::invalid_argument("charting: target width " + std::to_string(train.target.cols()) +
                                            " differs from decoder output " + std::to_string(width));
            TrainConfig cfg = config;
            cfg.train_snr_db.reset();
            std::array<nn::NetworkGraph *, 2> chain{&pair.encoder, &pair.decoder};
            return fit(chain, train, val, cfg, Metric::mse);
        }
    }

    TrainHistory train_charting(ChartingPair &pair, const SupervisedSet &train, const SupervisedSet &val,
                                const TrainConfig &config)
    {
        for (const SupervisedSet *s : {&train, &val})
            for (double v : s->target.values())
                if (v < 0.0)
                    throw std::invalid_argument("train_charting: angular-magnitude targets must be nonnegative");
        return fit_pair(pair, train, val, config);
    }

    TrainHistory train_vanilla_autoencoder(ChartingPair &pair, const nn::NumericArray &train,
                                           const nn::NumericArray &val, const TrainConfig &config)
    {
        SupervisedSet t{{train}, train};
        SupervisedSet v;
        if (val.rows() > 0)
            v = {{val}, val};
        return fit_pair(pair, t, v, config);
    }

    nn::NumericArray latents(const nn::NetworkGraph &encoder, const nn::NumericArray &channels)
    {
        return predict(encoder, std::span<const nn::NumericArray>(&channels, 1));
    }

    std::vector<double> average_ranks(std::span<const double> values)
    {
        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<double> ranks(values.size());
        for (std::size_t i = 0; i < order.size();)
        {
            std::size_t j = i;
            while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
                ++j;
            const double r = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                ranks[order[k]] = r;
            i = j + 1;
        }
        return ranks;
    }

    double spearman(std::span<const double> a, std::span<const double> b, bool *degenerate)
    {
        if (a.size() != b.size() || a.size() < 2)
            throw std::invalid_argument("spearman: need two equal-length samples of size >= 2");
        auto ra = average_ranks(a), rb = average_ranks(b);
        const double n = static_cast<double>(a.size());
        const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
        const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i)
        {
            sab += (ra[i] - ma) * (rb[i] - mb);
            saa += (ra[i] - ma) * (ra[i] - ma);
            sbb += (rb[i] - mb) * (rb[i] - mb);
        }
        const bool flat = saa == 0.0 || sbb == 0.0;
        if (degenerate)
            *degenerate = flat;
        return flat ? 0.0 : sab / std::sqrt(saa * sbb);
    }

    ChartQuality chart_quality(const nn::NumericArray &latent, std::span<const Point2> truth, std::uint64_t seed,
                               std::size_t max_pairs)
    {
        const std::size_t n = truth.size();
        if (latent.rows() != n || latent.cols() < 1)
            throw std::invalid_argument("chart_quality: latent and position counts differ");
        if (n < 10)
            throw std::invalid_argument("chart_quality: need at least 10 points");
        if (max_pairs < 2)
            throw std::invalid_argument("chart_quality: max_pairs must be >= 2");

        auto latent_dist = [&](std::size_t i, std::size_t j)
        {
            double acc = 0.0;
            for (std::size_t c = 0; c < latent.cols(); ++c)
            {
                double d = latent.at(i, c) - latent.at(j, c);
                acc += d * d;
            }
            return std::sqrt(acc);
        };

        std::vector<double> dl, dt;
        const std::size_t total = n * (n - 1) / 2;
        if (total <= max_pairs)
        {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                {
                    dl.push_back(latent_dist(i, j));
                    dt.push_back(distance(truth[i], truth[j]));
                }
        }
        else
        {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<std::size_t> pick_i(0, n - 1), pick_j(0, n - 2);
            for (std::size_t k = 0; k < max_pairs; ++k)
            {
                std::size_t i = pick_i(rng), j = pick_j(rng);
                if (j >= i)
                    ++j;
                dl.push_back(latent_dist(i, j));
                dt.push_back(distance(truth[i], truth[j]));
            }
        }
        ChartQuality q;
        q.pairs = dl.size();
        q.score = spearman(dl, dt, &q.degenerate);
        if (q.degenerate)
            warn("chart_quality: constant pairwise distances, score set to 0");
        return q;
    }
}
