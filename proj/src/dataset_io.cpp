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

// PCE1 dataset container and the JSON scenario file.

#include "pcenet/binary_io.hpp"
#include "pcenet/channel_gen.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>
#include <sstream>

namespace pce
{
    namespace io
    {
        std::vector<unsigned char> read_file(const std::string &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw IoError("cannot open '" + path + "' for reading");
            return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        }

        void write_file(const std::string &path, const std::vector<unsigned char> &bytes)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError("cannot open '" + path + "' for writing");
            out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (!out)
                throw IoError("write to '" + path + "' failed");
        }
    }

    namespace
    {
        constexpr char kMagic[4] = {'P', 'C', 'E', '1'};
        constexpr std::uint32_t kVersion = 1;
        constexpr std::uint64_t kHeaderBytes = 4 + 4 + 4 + 8;

        std::uint64_t expected_size(std::uint64_t n, std::uint64_t count)
        {
            return kHeaderBytes + count + count * 4 * (2 + 4 * n) + 8;
        }
    }

    std::vector<unsigned char> encode_dataset(const Dataset &ds)
    {
        if (ds.split.size() != ds.samples.size())
            throw std::invalid_argument("encode_dataset: split array length differs from sample count");
        io::ByteWriter w;
        w.put_bytes(std::string_view(kMagic, 4));
        w.put<std::uint32_t>(kVersion);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.antennas));
        w.put<std::uint64_t>(ds.samples.size());
        for (Split s : ds.split)
            w.put<std::uint8_t>(static_cast<std::uint8_t>(s));
        for (const ChannelSample &s : ds.samples)
        {
            if (s.h_main.size() != static_cast<std::size_t>(ds.antennas) ||
                s.h_side.size() != static_cast<std::size_t>(ds.antennas))
                throw std::invalid_argument("encode_dataset: channel length differs from antenna count");
            w.put<float>(s.position[0]);
            w.put<float>(s.position[1]);
            for (auto v : s.h_main)
            {
                w.put<float>(v.real());
                w.put<float>(v.imag());
            }
            for (auto v : s.h_side)
            {
                w.put<float>(v.real());
                w.put<float>(v.imag());
            }
        }
        w.put<double>(ds.norm_scale);
        return w.bytes();
    }

    Dataset decode_dataset(const std::vector<unsigned char> &bytes)
    {
        io::ByteReader r(bytes);
        std::string magic = r.get_bytes(4, "magic");
        if (magic != std::string(kMagic, 4))
            throw FormatError("bad magic: expected \"PCE1\"", 0);
        std::uint64_t at = r.offset();
        auto version = r.get<std::uint32_t>("version");
        if (version != kVersion)
            throw FormatError("unsupported dataset version " + std::to_string(version), at);
        at = r.offset();
        auto n = r.get<std::uint32_t>("antenna count");
        if (n == 0)
            throw FormatError("antenna count is zero", at);
        auto count = r.get<std::uint64_t>("sample count");

        // Fail on size mismatch before touching the payload so truncation is
        // reported as expected-vs-actual.
        std::uint64_t want = expected_size(n, count);
        if (bytes.size() < want)
            throw FormatError("truncated dataset: expected " + std::to_string(want) + " bytes, file has " +
                                  std::to_string(bytes.size()),
                              bytes.size());
        if (bytes.size() > want)
            throw FormatError("trailing bytes after dataset: expected " + std::to_string(want) + " bytes, file has " +
                                  std::to_string(bytes.size()),
                              want);

        Dataset ds;
        ds.antennas = static_cast<int>(n);
        ds.split.resize(count);
        for (std::uint64_t i = 0; i < count; ++i)
        {
            at = r.offset();
            auto id = r.get<std::uint8_t>("split id");
            if (id > 2)
                throw FormatError("invalid split id " + std::to_string(id), at);
            ds.split[i] = static_cast<Split>(id);
        }
        ds.samples.resize(count);
        for (auto &s : ds.samples)
        {
            s.position[0] = r.get<float>("position");
            s.position[1] = r.get<float>("position");
            s.h_main.resize(n);
            s.h_side.resize(n);
            for (auto &v : s.h_main)
            {
                float re = r.get<float>("h_main"), im = r.get<float>("h_main");
                v = {re, im};
            }
            for (auto &v : s.h_side)
            {
                float re = r.get<float>("h_side"), im = r.get<float>("h_side");
                v = {re, im};
            }
        }
        at = r.offset();
        ds.norm_scale = r.get<double>("norm_scale");
        if (!(ds.norm_scale > 0.0))
            throw FormatError("norm_scale must be positive", at);
        return ds;
    }

    void save_dataset(const Dataset &dataset, const std::string &path)
    {
        io::write_file(path, encode_dataset(dataset));
    }

    Dataset load_dataset(const std::string &path) { return decode_dataset(io::read_file(path)); }

    namespace
    {
        using nlohmann::json;

        Point2 point_from(const json &j, const std::string &field)
        {
            if (!j.is_array() || j.size() != 2)
                throw std::invalid_argument("invalid scenario field '" + field + "': expected [x, y]");
            return {j[0].get<double>(), j[1].get<double>()};
        }

        std::vector<Point2> points_from(const json &j, const std::string &field)
        {
            if (!j.is_array())
                throw std::invalid_argument("invalid scenario field '" + field + "': expected a list of [x, y]");
            std::vector<Point2> out;
            for (const auto &e : j)
                out.push_back(point_from(e, field));
            return out;
        }

        json point_to(Point2 p) { return json::array({p.x, p.y}); }
    }

    ScenarioConfig parse_scenario(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text, nullptr, true, true);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
        }
        if (!j.is_object())
            throw std::invalid_argument("scenario must be a JSON object");

        ScenarioConfig c;
        try
        {
            if (!j.contains("bs_positions"))
                throw std::invalid_argument("invalid scenario field 'bs_positions': missing");
            c.bs_positions = points_from(j.at("bs_positions"), "bs_positions");
            if (j.contains("bs_broadside_deg"))
                c.bs_broadside_deg = j.at("bs_broadside_deg").get<std::vector<double>>();
            c.antennas = j.value("antennas", c.antennas);
            c.wavelength = j.value("wavelength", c.wavelength);
            c.tx_power = j.value("tx_power", c.tx_power);
            if (j.contains("scatterers"))
                c.scatterers = points_from(j.at("scatterers"), "scatterers");
            if (!j.contains("grid"))
                throw std::invalid_argument("invalid scenario field 'grid': missing");
            const json &g = j.at("grid");
            if (g.contains("origin"))
                c.grid.origin = point_from(g.at("origin"), "grid.origin");
            c.grid.rows = g.value("rows", c.grid.rows);
            c.grid.cols = g.value("cols", c.grid.cols);
            c.grid.spacing = g.value("spacing", c.grid.spacing);
            c.ue_height = j.value("ue_height", c.ue_height);
            c.bs_height = j.value("bs_height", c.bs_height);
            c.reflection_loss = j.value("reflection_loss", c.reflection_loss);
            c.max_paths = j.value("max_paths", c.max_paths);
            if (j.contains("split"))
            {
                const json &s = j.at("split");
                c.split.train = s.value("train", c.split.train);
                c.split.val = s.value("val", c.split.val);
                c.split.test = s.value("test", c.split.test);
            }
            c.env_seed = j.value("env_seed", c.env_seed);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("scenario field has the wrong type: ") + e.what());
        }
        c.validate();
        return c;
    }

    ScenarioConfig load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open scenario '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_scenario(ss.str());
    }

    std::string scenario_to_json(const ScenarioConfig &c)
    {
        json j;
        j["bs_positions"] = json::array();
        for (auto p : c.bs_positions)
            j["bs_positions"].push_back(point_to(p));
        if (!c.bs_broadside_deg.empty())
            j["bs_broadside_deg"] = c.bs_broadside_deg;
        j["antennas"] = c.antennas;
        j["wavelength"] = c.wavelength;
        j["tx_power"] = c.tx_power;
        j["scatterers"] = json::array();
        for (auto p : c.scatterers)
            j["scatterers"].push_back(point_to(p));
        j["grid"] = {{"origin", point_to(c.grid.origin)},
                     {"rows", c.grid.rows},
                     {"cols", c.grid.cols},
                     {"spacing", c.grid.spacing}};
        j["ue_height"] = c.ue_height;
        j["bs_height"] = c.bs_height;
        j["reflection_loss"] = c.reflection_loss;
        j["max_paths"] = c.max_paths;
        j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
        j["env_seed"] = c.env_seed;
        return j.dump(2);
    }
}
