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

// Bundle checkpoints: one PCEW file per trained graph and a manifest with
// the configuration, the position scaler, and per-stage provenance.

#include "pcenet/binary_io.hpp"
#include "pcenet/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace pce
{
    namespace
    {
        using nlohmann::json;
        namespace fs = std::filesystem;

        constexpr int kManifestVersion = 1;

        json train_json(const TrainConfig &t)
        {
            json j{{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", t.lr}, {"seed", t.seed}};
            return j;
        }

        TrainConfig train_from(const json &j, TrainConfig t)
        {
            t.epochs = j.value("epochs", t.epochs);
            t.batch_size = j.value("batch_size", t.batch_size);
            t.lr = j.value("lr", t.lr);
            t.seed = j.value("seed", t.seed);
            return t;
        }

        json e2e_json(const E2EConfig &c)
        {
            return {{"antennas", c.antennas},
                    {"pilot_len", c.pilot_len},
                    {"feedback_bits", c.feedback_bits},
                    {"quant_bits", c.quant_bits},
                    {"power", c.power},
                    {"train_snr_db", c.train_snr_db},
                    {"residual_blocks", c.residual_blocks},
                    {"train", train_json(c.train)}};
        }

        E2EConfig e2e_from(const json &j, E2EConfig c)
        {
            c.antennas = j.value("antennas", c.antennas);
            c.pilot_len = j.value("pilot_len", c.pilot_len);
            c.feedback_bits = j.value("feedback_bits", c.feedback_bits);
            c.quant_bits = j.value("quant_bits", c.quant_bits);
            c.power = j.value("power", c.power);
            c.train_snr_db = j.value("train_snr_db", c.train_snr_db);
            c.residual_blocks = j.value("residual_blocks", c.residual_blocks);
            if (j.contains("train"))
                c.train = train_from(j.at("train"), c.train);
            return c;
        }

        json pcenet_json(const PcenetConfig &c)
        {
            return {{"mode", mode_name(c.mode)},
                    {"position_source", source_name(c.position_source)},
                    {"latent_model", latent_model_name(c.latent_model)},
                    {"main", e2e_json(c.main)},
                    {"side", e2e_json(c.side)},
                    {"localizer", train_json(c.localizer)},
                    {"charting", train_json(c.charting)},
                    {"position_folds", c.position_folds}};
        }

        PcenetConfig pcenet_from(const json &j)
        {
            PcenetConfig c;
            c.mode = parse_mode(j.value("mode", std::string(mode_name(c.mode))));
            c.position_source = parse_source(j.value("position_source", std::string(source_name(c.position_source))));
            c.latent_model = parse_latent_model(j.value("latent_model", std::string(latent_model_name(c.latent_model))));
            if (j.contains("main"))
                c.main = e2e_from(j.at("main"), c.main);
            if (j.contains("side"))
                c.side = e2e_from(j.at("side"), c.side);
            if (j.contains("localizer"))
                c.localizer = train_from(j.at("localizer"), c.localizer);
            if (j.contains("charting"))
                c.charting = train_from(j.at("charting"), c.charting);
            c.position_folds = j.value("position_folds", c.position_folds);
            c.validate();
            return c;
        }

        void write_text(const fs::path &path, const std::string &text)
        {
            io::write_file(path.string(), std::vector<unsigned char>(text.begin(), text.end()));
        }

        std::string read_text(const fs::path &path)
        {
            auto bytes = io::read_file(path.string());
            return {bytes.begin(), bytes.end()};
        }
    }

    std::string config_to_json(const PcenetConfig &config) { return pcenet_json(config).dump(2); }

    std::string e2e_config_to_json(const E2EConfig &config) { return e2e_json(config).dump(2); }

    PcenetConfig config_from_json(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text, nullptr, true, true);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("PCEnet config: ") + e.what());
        }
        try
        {
            return pcenet_from(j);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("PCEnet config: ") + e.what());
        }
    }

    void save_bundle(const PipelineBundle &bundle, const std::string &dir)
    {
        fs::path root(dir);
        std::error_code ec;
        fs::create_directories(root, ec);
        if (ec)
            throw IoError("cannot create bundle directory '" + dir + "': " + ec.message());

        json stages = json::array();
        for (const StageRecord &r : bundle.provenance)
        {
            json files = json::array();
            if (r.stage == 1 && bundle.main)
            {
                nn::save_parameters(*bundle.main, (root / "main.pcew").string());
                files.push_back("main.pcew");
            }
            else if (r.stage == 2 && bundle.localizer)
            {
                nn::save_parameters(*bundle.localizer, (root / "localizer.pcew").string());
                files.push_back("localizer.pcew");
            }
            else if (r.stage == 2 && bundle.chart)
            {
                nn::save_parameters(bundle.chart->encoder, (root / "encoder.pcew").string());
                nn::save_parameters(bundle.chart->decoder, (root / "decoder.pcew").string());
                files.push_back("encoder.pcew");
                files.push_back("decoder.pcew");
            }
            else if (r.stage == 3 && bundle.side)
            {
                nn::save_parameters(*bundle.side, (root / "side.pcew").string());
                files.push_back("side.pcew");
            }
            else
                throw StateError("bundle provenance lists stage " + std::to_string(r.stage) +
                                 " but its graph is missing");
            stages.push_back({{"stage", r.stage},
                              {"name", r.name},
                              {"files", files},
                              {"dataset_hash", r.dataset_hash},
                              {"epochs", r.epochs},
                              {"best_epoch", r.best_epoch},
                              {"seed", r.seed}});
        }
        const std::string cfg = pcenet_json(bundle.config).dump();
        json manifest{{"format", "pcenet-bundle"},
                      {"version", kManifestVersion},
                      {"config", pcenet_json(bundle.config)},
                      {"config_hash", fnv1a_hex({reinterpret_cast<const unsigned char *>(cfg.data()), cfg.size()})},
                      {"scaler",
                       {{"centroid", {bundle.scaler.centroid.x, bundle.scaler.centroid.y}},
                        {"half_diagonal", bundle.scaler.half_diagonal}}},
                      {"stages", stages}};
        write_text(root / "manifest.json", manifest.dump(2) + "\n");
    }

    PipelineBundle load_bundle(const std::string &dir)
    {
        fs::path root(dir);
        json m;
        try
        {
            m = json::parse(read_text(root / "manifest.json"));
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument("bundle manifest: " + std::string(e.what()));
        }
        try
        {
            if (m.value("format", std::string()) != "pcenet-bundle" || m.value("version", 0) != kManifestVersion)
                throw std::invalid_argument("bundle manifest: unsupported format or version");
            PipelineBundle b;
            b.config = pcenet_from(m.at("config"));
            const auto &sc = m.at("scaler");
            b.scaler.centroid = {sc.at("centroid").at(0).get<double>(), sc.at("centroid").at(1).get<double>()};
            b.scaler.half_diagonal = sc.at("half_diagonal").get<double>();
            for (const auto &s : m.at("stages"))
            {
                StageRecord r;
                r.stage = s.at("stage").get<int>();
                r.name = s.at("name").get<std::string>();
                r.dataset_hash = s.at("dataset_hash").get<std::string>();
                r.epochs = s.at("epochs").get<int>();
                r.best_epoch = s.at("best_epoch").get<int>();
                r.seed = s.at("seed").get<std::uint64_t>();
                const int n = b.config.main.antennas;
                const int blocks = b.config.main.residual_blocks;
                if (r.stage == 1)
                {
                    b.main = build_e2e_graph(b.config.main);
                    nn::load_parameters(*b.main, (root / "main.pcew").string());
                }
                else if (r.stage == 2 && r.name == "localizer")
                {
                    b.localizer = build_localizer(n);
                    nn::load_parameters(*b.localizer, (root / "localizer.pcew").string());
                }
                else if (r.stage == 2)
                {
                    b.chart = r.name == "charting" ? build_charting_pair(n, 1, blocks)
                                                   : build_vanilla_autoencoder(n, 1, blocks);
                    nn::load_parameters(b.chart->encoder, (root / "encoder.pcew").string());
                    nn::load_parameters(b.chart->decoder, (root / "decoder.pcew").string());
                }
                else if (r.stage == 3)
                {
                    b.side = build_side_graph(b.config.mode, b.config.side);
                    nn::load_parameters(*b.side, (root / "side.pcew").string());
                }
                else
                    throw std::invalid_argument("bundle manifest: unknown stage " + std::to_string(r.stage));
                b.provenance.push_back(std::move(r));
            }
            return b;
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument("bundle manifest: " + std::string(e.what()));
        }
    }
}
