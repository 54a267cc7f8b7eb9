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

#ifndef PCENET_TRAINING_HPP
#define PCENET_TRAINING_HPP

#include "pcenet/nn.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pce
{
    struct TrainConfig
    {
        int epochs = 500;
        std::size_t batch_size = 512;
        double lr = 1e-3;
        std::uint64_t seed = 1;
        // Noise level of awgn layers during training and validation; empty = bypass.
        std::optional<double> train_snr_db;
    };

    // Rows are samples; `inputs` feed the first graph of the chain in
    // declaration order.
    struct SupervisedSet
    {
        std::vector<nn::NumericArray> inputs;
        nn::NumericArray target;

        std::size_t size() const { return target.rows(); }
        SupervisedSet subset(std::span<const std::size_t> rows) const;
    };

    enum class Metric
    {
        nmse, // mean over samples of ||t - y||^2 / ||t||^2
        mse
    };

    struct EpochRecord
    {
        int epoch = 0;
        double train_loss = 0;
        double val_metric = 0;
    };

    struct TrainHistory
    {
        std::vector<EpochRecord> epochs;
        int best_epoch = -1; // index into `epochs`; parameters of that epoch are kept
    };

    // Trains a chain of graphs end-to-end on MSE with Adam. Graph k > 0 takes
    // the output of graph k - 1 as its only input. Parameters are kept in
    // float32 after every step, pilot layers are re-projected onto their power
    // constraint, and the epoch with the best validation metric wins (the
    // training set stands in when `val` is empty).
    TrainHistory fit(std::span<nn::NetworkGraph *const> chain, const SupervisedSet &train, const SupervisedSet &val,
                     const TrainConfig &config, Metric metric);
    TrainHistory fit(nn::NetworkGraph &graph, const SupervisedSet &train, const SupervisedSet &val,
                     const TrainConfig &config, Metric metric);

    // Forward pass of a chain in eval mode; `snr_db` enables noise on awgn
    // layers (nullopt = noiseless).
    nn::NumericArray predict(std::span<const nn::NetworkGraph *const> chain, std::span<const nn::NumericArray> inputs,
                             std::optional<double> snr_db, std::uint64_t seed);
    nn::NumericArray predict(const nn::NetworkGraph &graph, std::span<const nn::NumericArray> inputs,
                             std::optional<double> snr_db = std::nullopt, std::uint64_t seed = 0);

    double metric_value(Metric metric, const nn::NumericArray &target, const nn::NumericArray &pred);
    double mse(const nn::NumericArray &target, const nn::NumericArray &pred);
}

#endif
