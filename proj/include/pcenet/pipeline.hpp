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

#ifndef PCENET_PIPELINE_HPP
#define PCENET_PIPELINE_HPP

// Position-domain channel extrapolation: stage 1 acquires the main channel,
// stage 2 maps the reconstructed main channel to a position (or a label-free
// latent), stage 3 acquires the side channel with position-designed pilots
// and position-aided reconstruction.

#include "pcenet/positioning.hpp"

#include <optional>
#include <string>

namespace pce
{
    enum class PcenetMode
    {
        full,      // position-designed pilot + position-aided reconstruction
        one_sided, // fixed learned pilot, position only at the reconstructor
        label_free // charting latent in place of a position
    };

    enum class PositionSource
    {
        estimated, // localizer applied to the reconstructed main channel
        perfect,   // localizer trained and applied on the true main channel
        latent     // encoder latent of the label-free variant
    };

    enum class LatentModel
    {
        charting,  // main channel -> angular side magnitudes
        vanilla_ae // main channel -> main channel (control)
    };

    const char *mode_name(PcenetMode m);
    const char *source_name(PositionSource s);
    const char *latent_model_name(LatentModel m);
    PcenetMode parse_mode(const std::string &s);
    PositionSource parse_source(const std::string &s);
    LatentModel parse_latent_model(const std::string &s);

    struct PcenetConfig
    {
        PcenetMode mode = PcenetMode::full;
        PositionSource position_source = PositionSource::estimated;
        LatentModel latent_model = LatentModel::charting;
        E2EConfig main;
        E2EConfig side{16, 4, 32, 4, 1.0, 10.0, 10, {500, 512, 1e-3, 1, std::nullopt}};
        TrainConfig localizer{300, 512, 1e-3, 1, std::nullopt};
        TrainConfig charting{100, 512, 1e-3, 1, std::nullopt};
        // Stage-3 training positions come from localizers that did not see
        // the sample (k-fold cross-fitting); 0 or 1 uses the deployed localizer.
        int position_folds = 2;

        // Throws std::invalid_argument on inconsistent mode/source pairs.
        void validate() const;
        // Derives every stage seed from one experiment seed.
        void set_seed(std::uint64_t seed);
    };

    struct StageRecord
    {
        int stage = 0;
        std::string name; // "main_e2e", "localizer", "charting", "vanilla_ae", "side"
        std::string dataset_hash;
        int epochs = 0;
        int best_epoch = -1;
        std::uint64_t seed = 0;
        std::vector<EpochRecord> history;
    };

    struct PipelineBundle
    {
        PcenetConfig config;
        PositionScaler scaler;
        std::optional<nn::NetworkGraph> main;
        std::optional<nn::NetworkGraph> localizer;
        std::optional<ChartingPair> chart;
        std::optional<nn::NetworkGraph> side;
        std::vector<StageRecord> provenance;
    };

    // Position-conditioned pilot: dense(2 -> 4LN, tanh), two parallel
    // dense(LN, tanh) heads for Re and Im, then power projection to P.
    int add_position_pilot(nn::NetworkGraph &g, int position, int antennas, int pilot_len, double power);
    nn::NetworkGraph build_position_pilot_graph(int antennas, int pilot_len, double power = 1.0,
                                                std::uint64_t seed = 1);

    // Position branch dense(2 -> 4N, sigmoid) -> dense(N, sigmoid),
    // concatenated with the codeword and fed to the reconstruction stack.
    int add_fusion_reconstruction(nn::NetworkGraph &g, int position, int codeword, int antennas, int blocks);
    nn::NetworkGraph build_fusion_reconstructor(int antennas, int feedback_bits, int quant_bits, int blocks = 10,
                                                std::uint64_t seed = 1);
    std::size_t fusion_parameter_count(int antennas, int feedback_bits, int quant_bits, int blocks);

    // Stage-3 graph with inputs "position" (2) and "h" (2N), output 2N.
    nn::NetworkGraph build_side_graph(PcenetMode mode, const E2EConfig &side);

    inline constexpr const char *kSidePilotNode = "xs.norm";

    // Stage drivers. Each throws StateError naming the missing upstream stage.
    void train_stage1(PipelineBundle &bundle, const Dataset &ds);
    void train_stage2(PipelineBundle &bundle, const Dataset &ds);
    void train_pcenet_stage3(PipelineBundle &bundle, const Dataset &ds);

    // All three stages in order; a failing stage is reported with its number.
    PipelineBundle orchestrate_training(const Dataset &ds, const PcenetConfig &config);

    // Reconstructed main channels of `idx` through stage 1 (noise at `snr_db`).
    nn::NumericArray reconstruct_main(const PipelineBundle &bundle, const Dataset &ds,
                                      std::span<const std::size_t> idx, std::optional<double> snr_db,
                                      std::uint64_t seed);
    // Stage-3 position inputs (standardized coordinates or chart latents) from
    // main-channel rows.
    nn::NumericArray position_inputs(const PipelineBundle &bundle, const nn::NumericArray &main_channels);

    struct InferenceResult
    {
        CVector main_hat;
        Point2 position; // meters, or the raw latent in label-free mode
        PilotMatrix side_pilot;
        CVector side_hat;
        std::vector<std::uint8_t> main_codeword;
        std::vector<std::uint8_t> side_codeword;
    };

    // One pass of the deployment procedure for a single UE. Shape violations
    // are reported with the step at which they occur.
    InferenceResult run_inference(const PipelineBundle &bundle, const ChannelSample &sample,
                                  std::optional<double> test_snr_db, std::uint64_t seed);

    struct PcenetEvaluation
    {
        NmseResult side;
        NmseResult main;
        std::optional<LocalizationReport> localization;
    };

    // Batched inference over a split.
    PcenetEvaluation evaluate_pcenet(const PipelineBundle &bundle, const Dataset &ds, Split split,
                                     std::optional<double> test_snr_db, std::uint64_t seed);

    std::string config_to_json(const PcenetConfig &config);
    PcenetConfig config_from_json(const std::string &text);
    std::string e2e_config_to_json(const E2EConfig &config);

    // Directory of PCEW files plus manifest.json.
    void save_bundle(const PipelineBundle &bundle, const std::string &dir);
    PipelineBundle load_bundle(const std::string &dir);

    // Control regressor h'_m -> h_s: localizer backbone with a 2N linear head.
    nn::NetworkGraph build_direct_map(int antennas, std::uint64_t seed = 1);
    TrainHistory train_direct_map(nn::NetworkGraph &graph, const PipelineBundle &stage1, const Dataset &ds,
                                  const TrainConfig &config);
    NmseResult evaluate_direct_map(const nn::NetworkGraph &graph, const PipelineBundle &stage1, const Dataset &ds,
                                   Split split, std::optional<double> test_snr_db, std::uint64_t seed);
}

#endif
