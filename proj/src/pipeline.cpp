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

#include "pcenet/pipeline.hpp"

#include <stdexcept>

namespace pce
{
    namespace
    {
        // Independent noise streams for the stage-1 reconstructions that feed
        // later stages and for evaluation.
        constexpr std::uint64_t kReconTrain = 0x243f6a8885a308d3ULL;
        constexpr std::uint64_t kReconVal = 0x13198a2e03707344ULL;
        constexpr std::uint64_t kEvalMain = 0xa4093822299f31d0ULL;
        constexpr std::uint64_t kEvalSide = 0x082efa98ec4e6c89ULL;

        [[noreturn]] void step_error(int step, const std::string &what)
        {
            throw std::invalid_argument("inference step " + std::to_string(step) + ": " + what);
        }
    }

    const char *mode_name(PcenetMode m)
    {
        switch (m)
        {
        case PcenetMode::full:
            return "full";
        case PcenetMode::one_sided:
            return "one_sided";
        case PcenetMode::label_free:
            return "label_free";
        }
        return "?";
    }

    const char *source_name(PositionSource s)
    {
        switch (s)
        {
        case PositionSource::estimated:
            return "estimated";
        case PositionSource::perfect:
            return "perfect";
        case PositionSource::latent:
            return "latent";
        }
        return "?";
    }

    const char *latent_model_name(LatentModel m) { return m == LatentModel::charting ? "charting" : "vanilla_ae"; }

    PcenetMode parse_mode(const std::string &s)
    {
        for (auto m : {PcenetMode::full, PcenetMode::one_sided, PcenetMode::label_free})
            if (s == mode_name(m))
                return m;
        throw std::invalid_argument("unknown PCEnet mode '" + s + "'");
    }

    PositionSource parse_source(const std::string &s)
    {
        for (auto m : {PositionSource::estimated, PositionSource::perfect, PositionSource::latent})
            if (s == source_name(m))
                return m;
        throw std::invalid_argument("unknown position source '" + s + "'");
    }

    LatentModel parse_latent_model(const std::string &s)
    {
        for (auto m : {LatentModel::charting, LatentModel::vanilla_ae})
            if (s == latent_model_name(m))
                return m;
        throw std::invalid_argument("unknown latent model '" + s + "'");
    }

    void PcenetConfig::validate() const
    {
        main.validate();
        side.validate();
        if (main.antennas != side.antennas)
            throw std::invalid_argument("PCEnet config: main and side antenna counts differ");
        if ((mode == PcenetMode::label_free) != (position_source == PositionSource::latent))
            throw std::invalid_argument("PCEnet config: label_free mode requires position_source 'latent' and "
                                        "the latent source requires label_free mode");
        if (position_folds < 0)
            throw std::invalid_argument("PCEnet config: position_folds must be >= 0");
        for (const TrainConfig *t : {&main.train, &side.train, &localizer, &charting})
            if (t->epochs < 0 || t->batch_size == 0 || !(t->lr > 0.0))
                throw std::invalid_argument("PCEnet config: epochs >= 0, batch_size > 0 and lr > 0 required");
    }

    void PcenetConfig::set_seed(std::uint64_t seed)
    {
        main.train.seed = seed;
        localizer.seed = seed + 1;
        charting.seed = seed + 2;
        side.train.seed = seed + 3;
    }

    int add_position_pilot(nn::NetworkGraph &g, int position, int antennas, int pilot_len, double power)
    {
        if (antennas < 1 || pilot_len < 1)
            throw std::invalid_argument("position pilot: N and L must be >= 1");
        const auto n = static_cast<std::size_t>(antennas), l = static_cast<std::size_t>(pilot_len);
        int h = g.dense("xs.fc", position, 4 * l * n, nn::Activation::tanh);
        int re = g.dense("xs.re", h, l * n, nn::Activation::tanh);
        int im = g.dense("xs.im", h, l * n, nn::Activation::tanh);
        int x = g.concat("xs.cat", {re, im});
        return g.power_project(kSidePilotNode, x, n, l, power);
    }

    nn::NetworkGraph build_position_pilot_graph(int antennas, int pilot_len, double power, std::uint64_t seed)
    {
        nn::NetworkGraph g;
        int p = g.input("position", 2);
        g.set_output(add_position_pilot(g, p, antennas, pilot_len, power));
        nn::glorot_init(g, seed);
        g.round_parameters_to_float();
        return g;
    }

    int add_fusion_reconstruction(nn::NetworkGraph &g, int position, int codeword, int antennas, int blocks)
    {
        const auto n = static_cast<std::size_t>(antennas);
        int b = g.dense("fuse.fc1", position, 4 * n, nn::Activation::sigmoid);
        b = g.dense("fuse.fc2", b, n, nn::Activation::sigmoid);
        int cat = g.concat("fuse.cat", {b, codeword});
        return add_reconstruction(g, cat, antennas, blocks, "rec.");
    }

    nn::NetworkGraph build_fusion_reconstructor(int antennas, int feedback_bits, int quant_bits, int blocks,
                                                std::uint64_t seed)
    {
        if (antennas < 1 || quant_bits < 1 || feedback_bits < quant_bits || feedback_bits % quant_bits != 0)
            throw std::invalid_argument("fusion reconstructor: N_bit must be a positive multiple of B");
        nn::NetworkGraph g;
        int p = g.input("position", 2);
        int s = g.input("codeword", static_cast<std::size_t>(feedback_bits / quant_bits));
        g.set_output(add_fusion_reconstruction(g, p, s, antennas, blocks));
        nn::glorot_init(g, seed);
        g.round_parameters_to_float();
        return g;
    }

    std::size_t fusion_parameter_count(int antennas, int feedback_bits, int quant_bits, int blocks)
    {
        const auto n = static_cast<std::size_t>(antennas);
        const auto m = static_cast<std::size_t>(feedback_bits / quant_bits);
        std::size_t branch = (2 * 4 * n + 4 * n) + (4 * n * n + n);
        std::size_t init = (n + m) * 2 * n + 2 * n;
        std::size_t block = (2 * n * 8 * n + 8 * n) + (8 * n * 2 * n + 2 * n);
        return branch + init + static_cast<std::size_t>(blocks) * block;
    }

    nn::NetworkGraph build_side_graph(PcenetMode mode, const E2EConfig &c)
    {
        c.validate();
        const auto n = static_cast<std::size_t>(c.antennas), l = static_cast<std::size_t>(c.pilot_len);
        nn::NetworkGraph g;
        int pos = g.input("position", 2);
        int h = g.input(layer_names::channel, 2 * n);
        int y;
        if (mode == PcenetMode::one_sided)
        {
            y = g.pilot(layer_names::pilot, h, n, l);
            g.set_pilot_power(layer_names::pilot, c.power);
        }
        else
        {
            int x = add_position_pilot(g, pos, c.antennas, c.pilot_len, c.power);
            y = g.transmit("rx", h, x, n, l);
        }
        y = g.awgn(layer_names::noise, y, {c.train_snr_db, false});
        int s = add_compression(g, y, c.codeword_len(), c.quant_bits);
        g.set_output(add_fusion_reconstruction(g, pos, s, c.antennas, c.residual_blocks));
        nn::glorot_init(g, c.train.seed);
        g.project_pilots();
        g.round_parameters_to_float();
        return g;
    }

    namespace
    {
        StageRecord record(int stage, const std::string &name, const Dataset &ds, const TrainConfig &cfg,
                           const TrainHistory &h)
        {
            return {stage, name, dataset_hash(ds), cfg.epochs, h.best_epoch, cfg.seed, h.epochs};
        }

        void require_stage1(const PipelineBundle &b, int stage)
        {
            if (!b.main)
                throw StateError("stage " + std::to_string(stage) +
                                 " requires stage 1 (main channel acquisition) to be trained");
        }

        void require_stage2(const PipelineBundle &b, int stage)
        {
            require_stage1(b, stage);
            const bool label_free = b.config.mode == PcenetMode::label_free;
            if ((label_free && !b.chart) || (!label_free && !b.localizer))
                throw StateError("stage " + std::to_string(stage) + " requires stage 2 (" +
                                 (label_free ? "relative position learner" : "localizer") + ") to be trained");
        }

        // Input of the position learner: reconstructed main channel, or the
        // true one when the source is 'perfect'.
        nn::NumericArray learner_inputs(const PipelineBundle &b, const Dataset &ds, std::span<const std::size_t> idx,
                                        std::optional<double> snr_db, std::uint64_t seed)
        {
            if (b.config.position_source == PositionSource::perfect)
                return channel_rows(ds, idx, ChannelSelector::main);
            return reconstruct_main(b, ds, idx, snr_db, seed);
        }

        // A localizer reproduces its own training positions far more
        // accurately than unseen ones; stage 3 would learn to over-trust them.
        // Fold k is localized by a model trained on the remaining folds.
        nn::NumericArray out_of_fold_positions(const PipelineBundle &b, const Dataset &ds,
                                               std::span<const std::size_t> tr, std::span<const std::size_t> va,
                                               const nn::NumericArray &x_tr)
        {
            const auto folds = static_cast<std::size_t>(b.config.position_folds);
            if (tr.size() < folds)
                throw std::invalid_argument("stage 3: fewer training samples than position folds");
            const std::uint64_t s = b.config.main.train.seed;
            LocalizationSet val;
            if (!va.empty())
                val = {learner_inputs(b, ds, va, b.config.main.train_snr_db, s ^ kReconVal), dataset_positions(ds, va)};
            nn::NumericArray out = nn::NumericArray::matrix(tr.size(), 2);
            for (std::size_t f = 0; f < folds; ++f)
            {
                std::vector<std::size_t> in_rows, out_rows;
                for (std::size_t i = 0; i < tr.size(); ++i)
                    (i % folds == f ? out_rows : in_rows).push_back(i);
                LocalizationSet fit_set{x_tr.gather_rows(in_rows), {}};
                for (std::size_t i : in_rows)
                    fit_set.positions.push_back(ds.samples[tr[i]].point());
                nn::NetworkGraph g = build_localizer(b.config.main.antennas, b.config.localizer.seed + 101 + f);
                train_localizer(g, fit_set, val, b.scaler, b.config.localizer);
                nn::NumericArray held = x_tr.gather_rows(out_rows);
                nn::NumericArray pred = predict(g, std::span<const nn::NumericArray>(&held, 1));
                for (std::size_t k = 0; k < out_rows.size(); ++k)
                {
                    out.at(out_rows[k], 0) = pred.at(k, 0);
                    out.at(out_rows[k], 1) = pred.at(k, 1);
                }
            }
            return out;
        }

        void drop_provenance_from(PipelineBundle &b, int stage)
        {
            std::erase_if(b.provenance, [&](const StageRecord &r) { return r.stage >= stage; });
        }
    }

    nn::NumericArray reconstruct_main(const PipelineBundle &bundle, const Dataset &ds,
                                      std::span<const std::size_t> idx, std::optional<double> snr_db,
                                      std::uint64_t seed)
    {
        require_stage1(bundle, 2);
        nn::NumericArray h = channel_rows(ds, idx, ChannelSelector::main);
        return predict(*bundle.main, std::span<const nn::NumericArray>(&h, 1), snr_db, seed);
    }

    nn::NumericArray position_inputs(const PipelineBundle &bundle, const nn::NumericArray &main_hat)
    {
        require_stage2(bundle, 3);
        if (bundle.config.mode == PcenetMode::label_free)
            return latents(bundle.chart->encoder, main_hat);
        return predict(*bundle.localizer, std::span<const nn::NumericArray>(&main_hat, 1));
    }

    void train_stage1(PipelineBundle &bundle, const Dataset &ds)
    {
        const auto &c = bundle.config.main;
        bundle.main = build_e2e_graph(c);
        TrainHistory h = train_e2e(*bundle.main, ds, ChannelSelector::main, c);
        drop_provenance_from(bundle, 1);
        bundle.provenance.push_back(record(1, "main_e2e", ds, c.train, h));
    }

    void train_stage2(PipelineBundle &bundle, const Dataset &ds)
    {
        require_stage1(bundle, 2);
        const auto &cfg = bundle.config;
        const int n = cfg.main.antennas;
        bundle.scaler = PositionScaler::from_dataset(ds);
        auto tr = ds.indices(Split::train), va = ds.indices(Split::val);
        const std::uint64_t s = cfg.main.train.seed;
        nn::NumericArray x_tr = learner_inputs(bundle, ds, tr, cfg.main.train_snr_db, s ^ kReconTrain);
        nn::NumericArray x_va;
        if (!va.empty())
            x_va = learner_inputs(bundle, ds, va, cfg.main.train_snr_db, s ^ kReconVal);

        TrainHistory h;
        std::string name;
        TrainConfig tc;
        if (cfg.mode == PcenetMode::label_free)
        {
            bundle.localizer.reset();
            tc = cfg.charting;
            if (cfg.latent_model == LatentModel::charting)
            {
                name = "charting";
                bundle.chart = build_charting_pair(n, tc.seed, cfg.main.residual_blocks);
                SupervisedSet t{{x_tr}, angular_rows(ds, tr, ChannelSelector::side)};
                SupervisedSet v;
                if (!va.empty())
                    v = {{x_va}, angular_rows(ds, va, ChannelSelector::side)};
                h = train_charting(*bundle.chart, t, v, tc);
            }
            else
            {
                name = "vanilla_ae";
                bundle.chart = build_vanilla_autoencoder(n, tc.seed, cfg.main.residual_blocks);
                h = train_vanilla_autoencoder(*bundle.chart, x_tr, x_va, tc);
            }
        }
        else
        {
            bundle.chart.reset();
            tc = cfg.localizer;
            name = "localizer";
            bundle.localizer = build_localizer(n, tc.seed);
            LocalizationSet t{x_tr, dataset_positions(ds, tr)};
            LocalizationSet v{x_va, dataset_positions(ds, va)};
            h = train_localizer(*bundle.localizer, t, v, bundle.scaler, tc);
        }
        drop_provenance_from(bundle, 2);
        bundle.provenance.push_back(record(2, name, ds, tc, h));
    }

    void train_pcenet_stage3(PipelineBundle &bundle, const Dataset &ds)
    {
        require_stage2(bundle, 3);
        const auto &cfg = bundle.config;
        auto tr = ds.indices(Split::train), va = ds.indices(Split::val);
        if (tr.empty())
            throw std::invalid_argument("stage 3: empty training split");
        const std::uint64_t s = cfg.main.train.seed;

        nn::NumericArray x_tr = learner_inputs(bundle, ds, tr, cfg.main.train_snr_db, s ^ kReconTrain);
        nn::NumericArray hs_tr = channel_rows(ds, tr, ChannelSelector::side);
        nn::NumericArray pos_tr = cfg.mode != PcenetMode::label_free && cfg.position_folds > 1
                                      ? out_of_fold_positions(bundle, ds, tr, va, x_tr)
                                      : position_inputs(bundle, x_tr);
        SupervisedSet t{{pos_tr, hs_tr}, hs_tr};
        SupervisedSet v;
        if (!va.empty())
        {
            nn::NumericArray x_va = learner_inputs(bundle, ds, va, cfg.main.train_snr_db, s ^ kReconVal);
            nn::NumericArray hs_va = channel_rows(ds, va, ChannelSelector::side);
            v = {{position_inputs(bundle, x_va), hs_va}, hs_va};
        }

        bundle.side = build_side_graph(cfg.mode, cfg.side);
        TrainConfig tc = cfg.side.train;
        tc.train_snr_db = cfg.side.train_snr_db;
        TrainHistory h = fit(*bundle.side, t, v, tc, Metric::nmse);
        drop_provenance_from(bundle, 3);
        bundle.provenance.push_back(record(3, "side", ds, cfg.side.train, h));
    }

    PipelineBundle orchestrate_training(const Dataset &ds, const PcenetConfig &config)
    {
        config.validate();
        PipelineBundle b;
        b.config = config;
        using Stage = void (*)(PipelineBundle &, const Dataset &);
        const Stage stages[3] = {train_stage1, train_stage2, train_pcenet_stage3};
        for (int k = 0; k < 3; ++k)
        {
            const std::string prefix = "training stage " + std::to_string(k + 1) + " failed: ";
            try
            {
                stages[k](b, ds);
            }
            catch (const std::invalid_argument &e)
            {
                throw std::invalid_argument(prefix + e.what());
            }
            catch (const NumericError &e)
            {
                throw NumericError(prefix + e.what());
            }
            catch (const StateError &e)
            {
                throw StateError(prefix + e.what());
            }
            catch (const std::exception &e)
            {
                throw std::runtime_error(prefix + e.what());
            }
        }
        return b;
    }

    namespace
    {
        nn::NumericArray single_row(std::span<const std::complex<float>> h)
        {
            const std::size_t n = h.size();
            nn::NumericArray r = nn::NumericArray::matrix(1, 2 * n);
            for (std::size_t k = 0; k < n; ++k)
            {
                r.at(0, k) = h[k].real();
                r.at(0, n + k) = h[k].imag();
            }
            return r;
        }

        std::vector<std::uint8_t> codeword_bits(const nn::Activations &a, int bits)
        {
            const auto &levels = a.at(layer_names::codeword);
            return nn::encode_codeword(levels.values(), bits);
        }
    }

    InferenceResult run_inference(const PipelineBundle &bundle, const ChannelSample &sample,
                                  std::optional<double> test_snr_db, std::uint64_t seed)
    {
        if (!bundle.side)
            throw StateError("inference requires stage 3 (side channel acquisition) to be trained");
        require_stage2(bundle, 3);
        const auto &cfg = bundle.config;
        const auto n = static_cast<std::size_t>(cfg.main.antennas);
        InferenceResult out;

        // Steps 1-3: main pilot, UE feedback, main reconstruction.
        if (sample.h_main.size() != n)
            step_error(1, "main channel has " + std::to_string(sample.h_main.size()) + " antennas, pilot expects " +
                              std::to_string(n));
        std::mt19937_64 main_rng(seed ^ kEvalMain);
        nn::ForwardOptions mo{nn::Mode::eval, &main_rng, test_snr_db};
        nn::NumericArray hm = single_row(sample.h_main);
        nn::Activations ma = nn::forward(*bundle.main, hm, mo);
        out.main_codeword = codeword_bits(ma, cfg.main.quant_bits);
        const nn::NumericArray &main_hat = ma.output();
        if (main_hat.cols() != 2 * n)
            step_error(3, "main reconstruction width " + std::to_string(main_hat.cols()) + ", expected " +
                              std::to_string(2 * n));
        out.main_hat = row_to_cvector(main_hat.row(0));

        // Step 4: position (or latent) from the reconstructed main channel.
        const nn::NumericArray &learner_in = cfg.position_source == PositionSource::perfect ? hm : main_hat;
        const nn::NetworkGraph &learner =
            cfg.mode == PcenetMode::label_free ? bundle.chart->encoder : *bundle.localizer;
        if (learner.layer(learner.input_nodes().front()).width != learner_in.cols())
            step_error(4, "position learner expects width " +
                              std::to_string(learner.layer(learner.input_nodes().front()).width));
        nn::NumericArray pos = position_inputs(bundle, learner_in);
        if (pos.cols() != 2)
            step_error(4, "position estimate must be two-dimensional");
        out.position = cfg.mode == PcenetMode::label_free ? Point2{pos.at(0, 0), pos.at(0, 1)}
                                                          : bundle.scaler.restore({pos.at(0, 0), pos.at(0, 1)});

        // Step 5: the estimate reaches the side BS unchanged (ideal CPU link).
        // Steps 6-9: side pilot, reception, UE feedback, fused reconstruction.
        const nn::NetworkGraph &side = *bundle.side;
        if (side.layer(side.node("position")).width != pos.cols())
            step_error(6, "side pilot design expects a 2-D position");
        if (sample.h_side.size() != n)
            step_error(7, "side channel has " + std::to_string(sample.h_side.size()) + " antennas, pilot expects " +
                              std::to_string(n));
        std::mt19937_64 side_rng(seed ^ kEvalSide);
        nn::ForwardOptions so{nn::Mode::eval, &side_rng, test_snr_db};
        nn::NumericArray hs = single_row(sample.h_side);
        std::vector<nn::NumericArray> in{pos, hs};
        nn::Activations sa = nn::forward(side, in, so);
        const auto l = static_cast<std::size_t>(cfg.side.pilot_len);
        out.side_pilot = cfg.mode == PcenetMode::one_sided ? pilot_from_graph(side)
                                                           : pilot_from_row(sa.at(kSidePilotNode).row(0), n, l);
        out.side_codeword = codeword_bits(sa, cfg.side.quant_bits);
        if (sa.output().cols() != 2 * n)
            step_error(9, "side reconstruction width mismatch");
        out.side_hat = row_to_cvector(sa.output().row(0));
        return out;
    }

    PcenetEvaluation evaluate_pcenet(const PipelineBundle &bundle, const Dataset &ds, Split split,
                                     std::optional<double> test_snr_db, std::uint64_t seed)
    {
        if (!bundle.side)
            throw StateError("evaluation requires stage 3 (side channel acquisition) to be trained");
        require_stage2(bundle, 3);
        auto idx = ds.indices(split);
        if (idx.empty())
            throw std::invalid_argument(std::string("evaluate_pcenet: split '") + split_name(split) + "' is empty");
        PcenetEvaluation ev;
        nn::NumericArray hm = channel_rows(ds, idx, ChannelSelector::main);
        nn::NumericArray main_hat = reconstruct_main(bundle, ds, idx, test_snr_db, seed ^ kEvalMain);
        ev.main = nmse_rows(hm, main_hat);
        const nn::NumericArray &learner_in =
            bundle.config.position_source == PositionSource::perfect ? hm : main_hat;
        nn::NumericArray pos = position_inputs(bundle, learner_in);
        nn::NumericArray hs = channel_rows(ds, idx, ChannelSelector::side);
        std::vector<nn::NumericArray> in{pos, hs};
        nn::NumericArray side_hat = predict(*bundle.side, in, test_snr_db, seed ^ kEvalSide);
        ev.side = nmse_rows(hs, side_hat);
        if (bundle.localizer)
        {
            std::vector<Point2> est(pos.rows());
            for (std::size_t r = 0; r < pos.rows(); ++r)
                est[r] = bundle.scaler.restore({pos.at(r, 0), pos.at(r, 1)});
            auto truth = dataset_positions(ds, idx);
            std::vector<std::size_t> all(ds.samples.size());
            for (std::size_t i = 0; i < all.size(); ++i)
                all[i] = i;
            ev.localization = localization_report(est, truth, BoundingBox::around(dataset_positions(ds, all), 0.5));
        }
        return ev;
    }

    nn::NetworkGraph build_direct_map(int antennas, std::uint64_t seed)
    {
        if (antennas < 1)
            throw std::invalid_argument("build_direct_map: N must be >= 1");
        const auto n = static_cast<std::size_t>(antennas);
        nn::NetworkGraph g;
        int x = g.input("h", 2 * n);
        for (int k = 1; k <= 3; ++k)
            x = g.dense("map" + std::to_string(k), x, 8 * n, nn::Activation::relu);
        g.set_output(g.dense("out", x, 2 * n));
        nn::glorot_init(g, seed);
        g.round_parameters_to_float();
        return g;
    }

    TrainHistory train_direct_map(nn::NetworkGraph &graph, const PipelineBundle &stage1, const Dataset &ds,
                                  const TrainConfig &config)
    {
        require_stage1(stage1, 2);
        auto tr = ds.indices(Split::train), va = ds.indices(Split::val);
        const auto &c = stage1.config.main;
        SupervisedSet t{{reconstruct_main(stage1, ds, tr, c.train_snr_db, c.train.seed ^ kReconTrain)},
                        channel_rows(ds, tr, ChannelSelector::side)};
        SupervisedSet v;
        if (!va.empty())
            v = {{reconstruct_main(stage1, ds, va, c.train_snr_db, c.train.seed ^ kReconVal)},
                 channel_rows(ds, va, ChannelSelector::side)};
        TrainConfig tc = config;
        tc.train_snr_db.reset();
        return fit(graph, t, v, tc, Metric::nmse);
    }

    NmseResult evaluate_direct_map(const nn::NetworkGraph &graph, const PipelineBundle &stage1, const Dataset &ds,
                                   Split split, std::optional<double> test_snr_db, std::uint64_t seed)
    {
        auto idx = ds.indices(split);
        if (idx.empty())
            throw std::invalid_argument("evaluate_direct_map: empty split");
        nn::NumericArray main_hat = reconstruct_main(stage1, ds, idx, test_snr_db, seed ^ kEvalMain);
        nn::NumericArray pred = predict(graph, std::span<const nn::NumericArray>(&main_hat, 1));
        return nmse_rows(channel_rows(ds, idx, ChannelSelector::side), pred);
    }
}
