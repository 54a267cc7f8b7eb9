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

#ifndef PCENET_POSITIONING_HPP
#define PCENET_POSITIONING_HPP

// Channel-to-position bridges: the supervised localizer, the label-free
// channel-charting pair trained on main-to-side characteristics, and a
// vanilla autoencoder control, plus chart-quality and CDF utilities.

#include "pcenet/e2e_csi.hpp"

#include <iosfwd>

namespace pce
{
    // Affine map between meters and the network coordinate frame: centred on
    // the grid bounding box, scaled by half its diagonal.
    struct PositionScaler
    {
        Point2 centroid;
        double half_diagonal = 1.0;

        static PositionScaler from_positions(std::span<const Point2> positions);
        static PositionScaler from_dataset(const Dataset &ds);

        Point2 standardize(Point2 p) const;
        Point2 restore(Point2 s) const;
        nn::NumericArray standardize_rows(std::span<const Point2> positions) const;
    };

    // Axis-aligned box used to flag implausible estimates (logged, not clamped).
    struct BoundingBox
    {
        double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

        // Bounding box of `positions` grown by `margin` of its extent on every side.
        static BoundingBox around(std::span<const Point2> positions, double margin);
        bool contains(Point2 p) const;
    };

    std::vector<Point2> dataset_positions(const Dataset &ds, std::span<const std::size_t> idx);

    // dense(2N->8N, relu) x3 -> dense(8N->2) linear; Glorot initialized.
    nn::NetworkGraph build_localizer(int antennas, std::uint64_t seed = 1);
    std::size_t localizer_parameter_count(int antennas);

    // Channel rows [Re, Im] (2N wide) paired with positions in meters.
    struct LocalizationSet
    {
        nn::NumericArray channels;
        std::vector<Point2> positions;
        std::size_t size() const { return positions.size(); }
    };

    // MSE on standardized coordinates, best-on-validation epoch kept.
    TrainHistory train_localizer(nn::NetworkGraph &graph, const LocalizationSet &train, const LocalizationSet &val,
                                 const PositionScaler &scaler, const TrainConfig &config);

    // Deterministic forward pass; results in meters.
    std::vector<Point2> localize(const nn::NetworkGraph &graph, const nn::NumericArray &channels,
                                 const PositionScaler &scaler);
    Point2 localize(const nn::NetworkGraph &graph, std::span<const cd> channel, const PositionScaler &scaler);

    struct LocalizationReport
    {
        std::vector<double> errors; // per sample, meters
        std::vector<double> sorted; // ascending copy for CDF queries
        double mean = 0;
        std::size_t outside_box = 0; // estimates outside the plausibility box

        void write_csv(std::ostream &os) const;
    };

    // Euclidean errors; estimates outside `box` are counted and logged.
    LocalizationReport localization_report(std::span<const Point2> estimates, std::span<const Point2> truth,
                                           const BoundingBox &box);
    LocalizationReport localization_report(std::span<const Point2> estimates, std::span<const Point2> truth);

    // Linearly interpolated empirical quantile of the sorted errors, q in [0, 1].
    double error_cdf(const LocalizationReport &report, double q);

    // Encoder 2N -> 2 latent in (0,1)^2, decoder 2 -> output_width.
    struct ChartingPair
    {
        nn::NetworkGraph encoder;
        nn::NetworkGraph decoder;
    };

    inline constexpr const char *kLatentNode = "latent.act";

    // Encoder: dense(2N->4N, relu) x3 -> dense(2, sigmoid). Decoder: the
    // reconstruction stack (linear 2 -> 2N, 10 residual blocks) with a final
    // linear layer to N angular magnitudes.
    ChartingPair build_charting_pair(int antennas, std::uint64_t seed = 1, int residual_blocks = 10);
    // Same encoder; the decoder output is the 2N-wide main channel itself.
    ChartingPair build_vanilla_autoencoder(int antennas, std::uint64_t seed = 1, int residual_blocks = 10);
    std::size_t charting_parameter_count(int antennas, int residual_blocks, std::size_t decoder_out);

    // Angular magnitudes |F^H h| of the chosen channel, one N-wide row per index.
    nn::NumericArray angular_rows(const Dataset &ds, std::span<const std::size_t> idx, ChannelSelector which);

    // Joint MSE training of decoder(encoder(h_main)) against N-wide targets.
    TrainHistory train_charting(ChartingPair &pair, const SupervisedSet &train, const SupervisedSet &val,
                                const TrainConfig &config);
    // Joint MSE training of decoder(encoder(h)) against h.
    TrainHistory train_vanilla_autoencoder(ChartingPair &pair, const nn::NumericArray &train,
                                           const nn::NumericArray &val, const TrainConfig &config);

    nn::NumericArray latents(const nn::NetworkGraph &encoder, const nn::NumericArray &channels);

    struct ChartQuality
    {
        double score = 0;       // Spearman correlation in [-1, 1]
        bool degenerate = false; // constant distances on either side
        std::size_t pairs = 0;
    };

    // Spearman correlation between pairwise latent distances and pairwise true
    // distances. More than `max_pairs` pairs are subsampled with `seed`.
    ChartQuality chart_quality(const nn::NumericArray &latent, std::span<const Point2> truth, std::uint64_t seed = 1,
                               std::size_t max_pairs = 100000);

    // Average ranks (ties share the mean rank), 1-based.
    std::vector<double> average_ranks(std::span<const double> values);
    double spearman(std::span<const double> a, std::span<const double> b, bool *degenerate = nullptr);
}

#endif
