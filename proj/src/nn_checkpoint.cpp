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

// PCEW parameter checkpoints:
//   "PCEW" | u32 version | u32 entry count |
//   per entry: u32 name length, UTF-8 name, u32 rank, u32 dims[rank], f32 data

#include "pcenet/binary_io.hpp"
#include "pcenet/nn.hpp"

namespace pce::nn
{
    namespace
    {
        constexpr std::uint32_t kVersion = 1;
    }

    std::vector<unsigned char> encode_parameters(const NetworkGraph &graph)
    {
        io::ByteWriter w;
        w.put_bytes("PCEW");
        w.put<std::uint32_t>(kVersion);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(graph.parameters().size()));
        for (const auto &p : graph.parameters())
        {
            w.put<std::uint32_t>(static_cast<std::uint32_t>(p.name.size()));
            w.put_bytes(p.name);
            w.put<std::uint32_t>(static_cast<std::uint32_t>(p.value.rank()));
            for (std::size_t d : p.value.shape())
                w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
            for (double v : p.value.values())
                w.put<float>(static_cast<float>(v));
        }
        return w.bytes();
    }

    void decode_parameters(NetworkGraph &graph, const std::vector<unsigned char> &bytes)
    {
        io::ByteReader r(bytes);
        if (r.get_bytes(4, "magic") != "PCEW")
            throw FormatError("bad magic: expected \"PCEW\"", 0);
        std::uint64_t at = r.offset();
        auto version = r.get<std::uint32_t>("version");
        if (version != kVersion)
            throw FormatError("unsupported checkpoint version " + std::to_string(version), at);
        at = r.offset();
        auto count = r.get<std::uint32_t>("entry count");
        auto &params = graph.parameters();
        if (count != params.size())
            throw FormatError("checkpoint has " + std::to_string(count) + " entries, graph has " +
                                  std::to_string(params.size()),
                              at);

        // Decode into scratch first so a bad file leaves the graph untouched.
        std::vector<std::vector<double>> values(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
        {
            at = r.offset();
            auto len = r.get<std::uint32_t>("name length");
            std::string name = r.get_bytes(len, "name");
            if (name != params[i].name)
                throw FormatError("entry " + std::to_string(i) + " is '" + name + "', expected '" + params[i].name + "'",
                                  at);
            at = r.offset();
            auto rank = r.get<std::uint32_t>("rank");
            std::vector<std::size_t> shape;
            for (std::uint32_t d = 0; d < rank; ++d)
                shape.push_back(r.get<std::uint32_t>("dimension"));
            if (shape != params[i].value.shape())
                throw FormatError("shape mismatch for '" + name + "'", at);
            values[i].resize(params[i].value.size());
            r.require(4 * values[i].size(), "parameter data");
            for (double &v : values[i])
                v = r.get<float>("parameter data");
        }
        if (r.remaining() != 0)
            throw FormatError("trailing bytes after checkpoint", r.offset());
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i].value.values() = std::move(values[i]);
    }

    void save_parameters(const NetworkGraph &graph, const std::string &path)
    {
        io::write_file(path, encode_parameters(graph));
    }

    void load_parameters(NetworkGraph &graph, const std::string &path)
    {
        decode_parameters(graph, io::read_file(path));
    }
}
