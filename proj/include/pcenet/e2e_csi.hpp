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

#ifndef PCENET_E2E_CSI_HPP
#define PCENET_E2E_CSI_HPP

// End-to-end learned CSI acquisition (pilot design, UE-side compression with
// quantized feedback, BS-side residual reconstruction) and the classical
// LS / LMMSE baselines.
//
// Channels enter and leave the networks as [Re(h), Im(h)] rows of width 2N.

#include "pcenet/channel_gen.hpp"
#include "pcenet/nn.hpp"
#include "pcenet/training.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>

namespace pce
{
    struct E2EConfig
    {
        int antennas = 16;      // N
        int pilot_len = 8;      // L
        int feedback_bits = 64; // N_bit
        int quant_bits = 4;     // B
        double power = 1.0;     // P
        double train_snr_db = 10.0;
        int residual_blocks = 10;
        TrainConfig train{500, 512, 1e-3, 1, std::nullopt};

        int codeword_len() const { return feedback_bits / quant_bits; }
        void validate() const;
    };

    enum class ChannelSelector
    {
        main,
        side
    };

    // Layer names used by the E2E graph and the PCEnet side graphs.
    namespace layer_names
    {
        inline constexpr const char *channel = "h";
        inline constexpr const char *pilot = "pilot";
        inline constexpr const char *noise = "awgn";
        inline constexpr const char *codeword = "quantize";
    }

    // Appends the UE compression module (two sigmoid FC layers with 2M and M
    // units, M = N_bit / B) and the B-bit quantizer. Returns the quantizer node.
    int add_compression(nn::NetworkGraph &g, int from, int codeword_len, int quant_bits);

    // Appends the BS reconstruction module: linear FC to 2N, then `blocks`
    // residual refinements x + tanh(W2 tanh(W1 x + b1) + b2) with widths 8N
    // and 2N. With `out_width` > 0 a final linear FC maps 2N -> out_width.
    int add_reconstruction(nn::NetworkGraph &g, int from, int antennas, int blocks, const std::string &prefix,
                           std::size_t out_width = 0);

    // pilot -> awgn -> compression -> quantize -> reconstruction, Glorot
    // initialized from config.train.seed with the pilot on its power sphere.
    nn::NetworkGraph build_e2e_graph(const E2EConfig &config);

    // Closed-form parameter count of build_e2e_graph.
    std::size_t e2e_parameter_count(const E2EConfig &config);

    // Complex N x L pilot, row-major.
    struct PilotMatrix
    {
        std::size_t antennas = 0, len = 0;
        std::vector<cd> values;

        cd at(std::size_t n, std::size_t l) const { return values[n * len + l]; }
        cd &at(std::size_t n, std::size_t l) { return values[n * len + l]; }
        double column_power(std::size_t l) const;
        Eigen::MatrixXcd matrix() const;
    };

    PilotMatrix pilot_from_graph(const nn::NetworkGraph &graph, const std::string &layer = layer_names::pilot);
    // Flattened [Re(X), Im(X)] row as produced by a power_project layer.
    PilotMatrix pilot_from_row(std::span<const double> row, std::size_t antennas, std::size_t len);

    // y = h X + z with z drawn by awgn_apply (snr_db empty or +inf = noiseless).
    CVector simulate_pilot_reception(std::span<const cd> h, const PilotMatrix &x, std::optional<double> snr_db,
                                     std::uint64_t seed);

    // Channel rows [Re(h), Im(h)] for the given sample indices.
    nn::NumericArray channel_rows(const Dataset &ds, std::span<const std::size_t> idx, ChannelSelector which);
    CVector row_to_cvector(std::span<const double> row);

    struct NmseResult
    {
        double linear = 0;
        double db = 0; // -inf when linear == 0
        std::vector<double> per_sample;
    };

    inline constexpr double kNmseNegInfDb = -std::numeric_limits<double>::infinity();

    NmseResult nmse(std::span<const CVector> truth, std::span<const CVector> estimate);
    NmseResult nmse_rows(const nn::NumericArray &truth, const nn::NumericArray &estimate);
    double to_db(double linear);

    // Trains on the chosen channel of the train split; validation NMSE at the
    // training SNR selects the kept epoch.
    TrainHistory train_e2e(nn::NetworkGraph &graph, const Dataset &ds, ChannelSelector which, const E2EConfig &config);

    // Eval-mode forward over `split` with awgn at `test_snr_db` (empty = noiseless).
    NmseResult evaluate_pipeline(const nn::NetworkGraph &graph, const Dataset &ds, Split split, ChannelSelector which,
                                 std::optional<double> test_snr_db, std::uint64_t seed);

    // Minimum-norm minimizer of ||y - h X||^2.
    CVector ls_estimate(std::span<const cd> y, const PilotMatrix &x);

    struct ChannelStatistics
    {
        Eigen::RowVectorXcd mean;
        Eigen::MatrixXcd cov; // E[(h - mean)^H (h - mean)]
    };

    ChannelStatistics channel_statistics(const Dataset &ds, Split split, ChannelSelector which);

    // Linear MMSE for row-vector channels:
    //   h_hat = mean + (y - mean X) (X^H C X + noise_var I)^{-1} X^H C.
    // Throws NumericError when the inner matrix is singular.
    CVector mmse_estimate(std::span<const cd> y, const PilotMatrix &x, double noise_var, const ChannelStatistics &stats);

    // Fixed pilot of the classical baselines: sqrt(P) I when L == N, otherwise
    // the first L columns of the sqrt(P)-scaled unitary DFT matrix.
    PilotMatrix baseline_pilot(int antennas, int len, double power);

    enum class Baseline
    {
        ls,
        mmse
    };

    // Per-sample noise variance is the one awgn_apply uses (genie-aided), so
    // the LMMSE weight matches the injected noise.
    NmseResult evaluate_baseline(Baseline kind, const Dataset &ds, Split split, ChannelSelector which, int pilot_len,
                                 double power, std::optional<double> test_snr_db, std::uint64_t seed);
}

#endif
