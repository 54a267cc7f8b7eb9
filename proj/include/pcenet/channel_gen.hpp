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

#ifndef PCENET_CHANNEL_GEN_HPP
#define PCENET_CHANNEL_GEN_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pce
{
    using cd = std::complex<double>;
    using CVector = std::vector<cd>;

    struct Point2
    {
        double x = 0.0;
        double y = 0.0;
        bool operator==(const Point2 &) const = default;
    };

    double distance(Point2 a, Point2 b);

    struct GridSpec
    {
        Point2 origin;      // position of grid index (0, 0) [m]
        int rows = 1;       // along +y
        int cols = 1;       // along +x
        double spacing = 1; // [m]
    };

    struct SplitFractions
    {
        double train = 0.85;
        double val = 0.05;
        double test = 0.10;
    };

    // Deterministic description of a desk-scale propagation scenario.
    struct ScenarioConfig
    {
        std::vector<Point2> bs_positions;           // [0] = main BS, [1] = side BS
        std::vector<double> bs_broadside_deg;       // array broadside azimuth per BS; empty = face the grid centre
        int antennas = 16;                          // N, half-wavelength ULA
        double wavelength = 0.0857;                 // [m], 3.5 GHz
        double tx_power = 1.0;                      // P, squared norm of every pilot column
        std::vector<Point2> scatterers;             // single-bounce reflectors [m]
        GridSpec grid;
        double ue_height = 2.0;                     // [m]
        double bs_height = 6.0;                     // [m]
        double reflection_loss = 0.3;               // rho, amplitude factor of every NLOS bounce
        int max_paths = 10;                         // cap on NLOS paths per link (LOS is always kept)
        SplitFractions split;
        std::uint64_t env_seed = 1;

        // Throws std::invalid_argument naming the offending field.
        void validate() const;

        // Broadside azimuth of BS `index` in radians.
        double broadside(std::size_t index) const;

        // Grid position of sample (row, col), rounded to float32 so that the
        // stored dataset coordinate regenerates the stored channel exactly.
        Point2 grid_position(int row, int col) const;

        Point2 grid_centroid() const;
        double grid_diagonal() const;
    };

    ScenarioConfig load_scenario(const std::string &path);
    ScenarioConfig parse_scenario(const std::string &json_text);
    std::string scenario_to_json(const ScenarioConfig &config);

    struct PropagationPath
    {
        double departure_angle = 0; // radians, relative to array broadside, in [-pi/2, pi/2]
        cd gain;                    // amplitude * exp(j * phase)
    };

    // ULA response: entry k = exp(j*pi*k*sin(theta)).
    CVector steering_vector(double theta, int antennas);

    // LOS path first, then the strongest NLOS paths (at most max_paths),
    // strongest first.
    std::vector<PropagationPath> synthesize_paths(const ScenarioConfig &config, std::size_t bs_index, Point2 ue);

    CVector channel_from_paths(std::span<const PropagationPath> paths, int antennas);

    // Unnormalized narrowband channel from BS `bs_index` to a UE at `ue`.
    CVector raw_channel(const ScenarioConfig &config, std::size_t bs_index, Point2 ue);

    // |F^H h| with F the unitary DFT matrix.
    std::vector<double> angular_transform(std::span<const cd> h);

    enum class Split : std::uint8_t
    {
        train = 0,
        val = 1,
        test = 2
    };

    const char *split_name(Split s);
    Split parse_split(const std::string &name);

    // Stored in float32 so that the on-disk format round-trips bit-exactly.
    struct ChannelSample
    {
        std::array<float, 2> position{};
        std::vector<std::complex<float>> h_main;
        std::vector<std::complex<float>> h_side;

        Point2 point() const { return {position[0], position[1]}; }
        bool operator==(const ChannelSample &) const = default;
    };

    struct Dataset
    {
        int antennas = 0;
        std::vector<ChannelSample> samples;
        std::vector<Split> split; // one entry per sample
        double norm_scale = 1.0;

        std::vector<std::size_t> indices(Split s) const;
        std::size_t count(Split s) const;
        bool operator==(const Dataset &) const = default;
    };

    struct SplitCounts
    {
        std::size_t train = 0, val = 0, test = 0;
    };

    // Train and val take floor(fraction * total); test takes the remainder.
    SplitCounts split_counts(std::size_t total, const SplitFractions &fractions);

    Dataset generate_dataset(const ScenarioConfig &config);

    // Regenerates sample `index` (row-major grid order) with the dataset's
    // normalization; used to check position consistency.
    ChannelSample regenerate_sample(const ScenarioConfig &config, std::size_t index, double norm_scale);

    std::vector<unsigned char> encode_dataset(const Dataset &dataset);
    Dataset decode_dataset(const std::vector<unsigned char> &bytes);
    void save_dataset(const Dataset &dataset, const std::string &path);
    Dataset load_dataset(const std::string &path);

    // FNV-1a over the encoded bytes, hex. Used for provenance.
    std::string dataset_hash(const Dataset &dataset);
    std::string fnv1a_hex(std::span<const unsigned char> bytes);

    CVector to_cvector(std::span<const std::complex<float>> h);
}

#endif
