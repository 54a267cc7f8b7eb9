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

#include "pcenet/training.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pce
{
    namespace
    {
        constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;
        constexpr std::uint64_t kValStream = 0xc2b2ae3d27d4eb4fULL;
    }

    SupervisedSet SupervisedSet::subset(std::span<const std::size_t> rows) const
    {
        SupervisedSet s;
        if (rows.empty())
            return s;
        for (const auto &in : inputs)
            s.inputs.push_back(in.gather_rows(rows));
        s.target = target.gather_rows(rows);
        return s;
    }

    double mse(const nn::NumericArray &target, const nn::NumericArray &pred)
    {
        if (target.size() != pred.size() || target.size() == 0)
            throw std::invalid_argument("mse: size mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i)
        {
            double d = target[i] - pred[i];
            acc += d * d;
        }
        return acc / static_cast<double>(target.size());
    }

    double metric_value(Metric metric, const nn::NumericArray &target, const nn::NumericArray &pred)
    {
        if (metric == Metric::mse)
            return mse(target, pred);
        if (target.size() != pred.size() || target.rows() == 0)
            throw std::invalid_argument("nmse: size mismatch");
        double acc = 0.0;
        for (std::size_t r = 0; r < target.rows(); ++r)
        {
            auto t = target.row(r);
            auto p = pred.row(r);
            double num = 0.0, den = 0.0;
            for (std::size_t c = 0; c < t.size(); ++c)
            {
                num += (t[c] - p[c]) * (t[c] - p[c]);
                den += t[c] * t[c];
            }
            if (den == 0.0)
                throw std::invalid_argument("nmse: zero-norm target at row " + std::to_string(r));
            acc += num / den;
        }
        return acc / static_cast<double>(target.rows());
    }

    nn::NumericArray predict(std::span<const nn::NetworkGraph *const> chain, std::span<const nn::NumericArray> inputs,
                             std::optional<double> snr_db, std::uint64_t seed)
    {
        if (chain.empty())
            throw std::invalid_argument("predict: empty chain");
        std::mt19937_64 rng(seed);
        nn::ForwardOptions opts;
        opts.mode = nn::Mode::eval;
        opts.rng = &rng;
        opts.snr_override_db = snr_db;
        nn::NumericArray x = nn::forward(*chain[0], inputs, opts).output();
        for (std::size_t k = 1; k < chain.size(); ++k)
            x = nn::forward(*chain[k], x, opts).output();
        return x;
    }

    nn::NumericArray predict(const nn::NetworkGraph &graph, std::span<const nn::NumericArray> inputs,
                             std::optional<double> snr_db, std::uint64_t seed)
    {
        const nn::NetworkGraph *g = &graph;
        return predict(std::span<const nn::NetworkGraph *const>(&g, 1), inputs, snr_db, seed);
    }

    TrainHistory fit(nn::NetworkGraph &graph, const SupervisedSet &train, const SupervisedSet &val,
                     const TrainConfig &config, Metric metric)
    {
        nn::NetworkGraph *g = &graph;
        return fit(std::span<nn::NetworkGraph *const>(&g, 1), train, val, config, metric);
    }

    TrainHistory fit(std::span<nn::NetworkGraph *const> chain, const SupervisedSet &train, const SupervisedSet &val,
                     const TrainConfig &config, Metric metric)
    {
        if (chain.empty())
            throw std::invalid_argument("fit: empty chain");
        if (train.size() == 0)
            throw std::invalid_argument("fit: empty training set");
        if (config.batch_size == 0)
            throw std::invalid_argument("fit: batch size must be positive");
        if (config.epochs < 0)
            throw std::invalid_argument("fit: epochs must be >= 0");

        TrainHistory history;
        if (config.epochs == 0)
            return history;

        std::vector<nn::AdamState> adam;
        for (auto *g : chain)
        {
            g->project_pilots();
            g->round_parameters_to_float();
            adam.push_back(nn::make_adam(g->parameters(), config.lr));
        }
        std::vector<const nn::NetworkGraph *> cchain(chain.begin(), chain.end());

        const SupervisedSet &val_set = val.size() > 0 ? val : train;
        auto snapshot = [&]
        {
            std::vector<std::vector<nn::Parameter>> s;
            for (auto *g : chain)
                s.push_back(g->parameters());
            return s;
        };
        auto best = snapshot();
        double best_metric = std::numeric_limits<double>::infinity();

        std::mt19937_64 shuffle_rng(config.seed);
        std::mt19937_64 noise_rng(config.seed ^ kNoiseStream);
        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), std::size_t{0});

        nn::ForwardOptions opts;
        opts.mode = nn::Mode::train;
        opts.rng = &noise_rng;
        opts.snr_override_db = config.train_snr_db;

        for (int epoch = 0; epoch < config.epochs; ++epoch)
        {
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            double loss_sum = 0.0;
            for (std::size_t start = 0; start < order.size(); start += config.batch_size)
            {
                std::size_t stop = std::min(order.size(), start + config.batch_size);
                std::span<const std::size_t> rows(order.data() + start, stop - start);
                SupervisedSet batch = train.subset(rows);

                std::vector<nn::Activations> caches;
                caches.push_back(nn::forward(*chain[0], batch.inputs, opts));
                for (std::size_t k = 1; k < chain.size(); ++k)
                    caches.push_back(nn::forward(*chain[k], caches.back().output(), opts));

                const nn::NumericArray &y = caches.back().output();
                if (y.size() != batch.target.size())
                    throw std::invalid_argument("fit: network output width differs from target width");
                nn::NumericArray grad(y.shape(), 0.0);
                const double scale = 2.0 / static_cast<double>(y.size());
                double loss = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i)
                {
                    double d = y[i] - batch.target[i];
                    loss += d * d;
                    grad[i] = scale * d;
                }
                loss_sum += loss / static_cast<double>(y.cols());

                for (std::size_t k = chain.size(); k-- > 0;)
                {
                    nn::Gradients g = nn::backward(*chain[k], caches[k], grad);
                    if (k > 0)
                        grad = std::move(g.inputs.at(0));
                    nn::adam_step(adam[k], chain[k]->parameters(), g.params);
                    chain[k]->project_pilots();
                    chain[k]->round_parameters_to_float();
                }
            }

            EpochRecord rec;
            rec.epoch = epoch + 1;
            rec.train_loss = loss_sum / static_cast<double>(order.size());
            nn::NumericArray pred = predict(cchain, val_set.inputs, config.train_snr_db, config.seed ^ kValStream);
            rec.val_metric = metric_value(metric, val_set.target, pred);
            history.epochs.push_back(rec);
            if (rec.val_metric < best_metric)
            {
                best_metric = rec.val_metric;
                history.best_epoch = epoch;
                best = snapshot();
            }
        }
        for (std::size_t k = 0; k < chain.size(); ++k)
            chain[k]->parameters() = best[k];
        return history;
    }
}
