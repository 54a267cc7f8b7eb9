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

#include "pcenet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace pce::nn
{
    NumericArray::NumericArray(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape))
    {
        std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
        for (std::size_t d : shape_)
            if (d == 0)
                throw std::invalid_argument("NumericArray: zero-length dimension");
        values_.assign(n, fill);
    }

    NumericArray::NumericArray(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values))
    {
        std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
        if (n != values_.size())
            throw std::invalid_argument("NumericArray: value count " + std::to_string(values_.size()) +
                                        " does not match shape product " + std::to_string(n));
    }

    NumericArray NumericArray::gather_rows(std::span<const std::size_t> idx) const
    {
        if (rank() != 2)
            throw std::invalid_argument("gather_rows: rank-2 array required");
        if (idx.empty())
            throw std::invalid_argument("gather_rows: empty index set");
        NumericArray out = matrix(idx.size(), cols());
        for (std::size_t r = 0; r < idx.size(); ++r)
        {
            if (idx[r] >= rows())
                throw std::invalid_argument("gather_rows: row index out of range");
            std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(idx[r] * cols()), cols(),
                        out.values_.begin() + static_cast<std::ptrdiff_t>(r * cols()));
        }
        return out;
    }

    void NumericArray::check_finite(const std::string &where) const
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw NumericError("non-finite value at flat index " + std::to_string(i) + " in " + where);
    }

    const char *kind_name(LayerKind kind)
    {
        switch (kind)
        {
        case LayerKind::input:
            return "input";
        case LayerKind::dense:
            return "dense";
        case LayerKind::activation:
            return "activation";
        case LayerKind::quantize:
            return "quantize";
        case LayerKind::awgn:
            return "awgn";
        case LayerKind::power_project:
            return "power_project";
        case LayerKind::concat:
            return "concat";
        case LayerKind::add:
            return "add";
        case LayerKind::pilot:
            return "pilot";
        case LayerKind::transmit:
            return "transmit";
        }
        return "?";
    }

    int NetworkGraph::push(LayerSpec spec)
    {
        if (spec.name.empty())
            throw std::invalid_argument("layer name must be non-empty");
        if (has_node(spec.name))
            throw std::invalid_argument("duplicate layer name '" + spec.name + "'");
        for (int i : spec.inputs)
            if (i < 0 || static_cast<std::size_t>(i) >= layers_.size())
                throw std::invalid_argument("layer '" + spec.name + "' references unknown node " + std::to_string(i));
        layers_.push_back(std::move(spec));
        return static_cast<int>(layers_.size()) - 1;
    }

    int NetworkGraph::add_param(const std::string &name, std::vector<std::size_t> shape, std::size_t fan_in,
                                std::size_t fan_out)
    {
        params_.push_back({name, NumericArray(std::move(shape)), true, fan_in, fan_out});
        return static_cast<int>(params_.size()) - 1;
    }

    std::size_t NetworkGraph::width_of(int node, const std::string &who) const
    {
        if (node < 0 || static_cast<std::size_t>(node) >= layers_.size())
            throw std::invalid_argument("layer '" + who + "' references unknown node " + std::to_string(node));
        return layers_[static_cast<std::size_t>(node)].width;
    }

    int NetworkGraph::input(const std::string &name, std::size_t width)
    {
        if (width == 0)
            throw std::invalid_argument("input '" + name + "' must have positive width");
        LayerSpec s;
        s.kind = LayerKind::input;
        s.name = name;
        s.width = width;
        return push(std::move(s));
    }

    int NetworkGraph::dense(const std::string &name, int from, std::size_t out, bool bias)
    {
        std::size_t in = width_of(from, name);
        if (out == 0)
            throw std::invalid_argument("dense layer '" + name + "' must have positive output width");
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.name = name;
        s.inputs = {from};
        s.in = in;
        s.width = out;
        s.has_bias = bias;
        int node = push(std::move(s));
        layers_.back().weight = add_param(name + ".weight", {in, out}, in, out);
        if (bias)
            layers_.back().bias = add_param(name + ".bias", {out}, 0, 0);
        return node;
    }

    int NetworkGraph::activation(const std::string &name, int from, Activation act)
    {
        LayerSpec s;
        s.kind = LayerKind::activation;
        s.name = name;
        s.inputs = {from};
        s.width = width_of(from, name);
        s.activation = act;
        return push(std::move(s));
    }

    int NetworkGraph::dense(const std::string &name, int from, std::size_t out, Activation act, bool bias)
    {
        int d = dense(name, from, out, bias);
        return activation(name + ".act", d, act);
    }

    int NetworkGraph::quantize(const std::string &name, int from, int bits)
    {
        if (bits < 1 || bits > 24)
            throw std::invalid_argument("quantize layer '" + name + "': bits must be in [1, 24]");
        LayerSpec s;
        s.kind = LayerKind::quantize;
        s.name = name;
        s.inputs = {from};
        s.width = width_of(from, name);
        s.bits = bits;
        return push(std::move(s));
    }

    int NetworkGraph::awgn(const std::string &name, int from, AwgnSpec spec)
    {
        std::size_t w = width_of(from, name);
        if (w % 2 != 0)
            throw std::invalid_argument("awgn layer '" + name + "' needs an even [Re, Im] width");
        LayerSpec s;
        s.kind = LayerKind::awgn;
        s.name = name;
        s.inputs = {from};
        s.width = w;
        s.awgn = spec;
        return push(std::move(s));
    }

    int NetworkGraph::power_project(const std::string &name, int from, std::size_t antennas, std::size_t pilot_len,
                                    double power)
    {
        if (!(power > 0.0))
            throw std::invalid_argument("power_project layer '" + name + "': power must be > 0");
        if (width_of(from, name) != 2 * antennas * pilot_len)
            throw std::invalid_argument("power_project layer '" + name + "': input width must be 2*N*L");
        LayerSpec s;
        s.kind = LayerKind::power_project;
        s.name = name;
        s.inputs = {from};
        s.width = 2 * antennas * pilot_len;
        s.antennas = antennas;
        s.pilot_len = pilot_len;
        s.power = power;
        return push(std::move(s));
    }

    int NetworkGraph::concat(const std::string &name, std::initializer_list<int> from)
    {
        return concat(name, std::vector<int>(from));
    }

    int NetworkGraph::concat(const std::string &name, const std::vector<int> &from)
    {
        if (from.empty())
            throw std::invalid_argument("concat layer '" + name + "' needs at least one branch");
        LayerSpec s;
        s.kind = LayerKind::concat;
        s.name = name;
        s.inputs = from;
        for (int f : from)
            s.width += width_of(f, name);
        return push(std::move(s));
    }

    int NetworkGraph::add(const std::string &name, int a, int b)
    {
        if (width_of(a, name) != width_of(b, name))
            throw std::invalid_argument("add layer '" + name + "': branch widths differ");
        LayerSpec s;
        s.kind = LayerKind::add;
        s.name = name;
        s.inputs = {a, b};
        s.width = width_of(a, name);
        return push(std::move(s));
    }

    int NetworkGraph::pilot(const std::string &name, int from, std::size_t antennas, std::size_t pilot_len)
    {
        if (antennas == 0 || pilot_len == 0)
            throw std::invalid_argument("pilot layer '" + name + "': N and L must be positive");
        if (width_of(from, name) != 2 * antennas)
            throw std::invalid_argument("pilot layer '" + name + "': input width must be 2N");
        LayerSpec s;
        s.kind = LayerKind::pilot;
        s.name = name;
        s.inputs = {from};
        s.width = 2 * pilot_len;
        s.antennas = antennas;
        s.pilot_len = pilot_len;
        s.has_bias = false;
        int node = push(std::move(s));
        layers_.back().weight = add_param(name + ".re", {antennas, pilot_len}, antennas, pilot_len);
        layers_.back().bias = add_param(name + ".im", {antennas, pilot_len}, antennas, pilot_len);
        return node;
    }

    int NetworkGraph::transmit(const std::string &name, int channel, int pilot_node, std::size_t antennas,
                               std::size_t pilot_len)
    {
        if (width_of(channel, name) != 2 * antennas)
            throw std::invalid_argument("transmit layer '" + name + "': channel width must be 2N");
        if (width_of(pilot_node, name) != 2 * antennas * pilot_len)
            throw std::invalid_argument("transmit layer '" + name + "': pilot width must be 2*N*L");
        LayerSpec s;
        s.kind = LayerKind::transmit;
        s.name = name;
        s.inputs = {channel, pilot_node};
        s.width = 2 * pilot_len;
        s.antennas = antennas;
        s.pilot_len = pilot_len;
        return push(std::move(s));
    }

    void NetworkGraph::set_output(int node)
    {
        width_of(node, "<output>");
        output_ = node;
    }

    int NetworkGraph::output_node() const
    {
        if (layers_.empty())
            throw StateError("graph has no layers");
        return output_ >= 0 ? output_ : static_cast<int>(layers_.size()) - 1;
    }

    int NetworkGraph::node(const std::string &name) const
    {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].name == name)
                return static_cast<int>(i);
        throw std::invalid_argument("no layer named '" + name + "'");
    }

    bool NetworkGraph::has_node(const std::string &name) const
    {
        return std::any_of(layers_.begin(), layers_.end(), [&](const LayerSpec &l) { return l.name == name; });
    }

    std::vector<int> NetworkGraph::input_nodes() const
    {
        std::vector<int> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].kind == LayerKind::input)
                out.push_back(static_cast<int>(i));
        return out;
    }

    std::size_t NetworkGraph::count(LayerKind kind) const
    {
        return static_cast<std::size_t>(
            std::count_if(layers_.begin(), layers_.end(), [&](const LayerSpec &l) { return l.kind == kind; }));
    }

    Parameter &NetworkGraph::parameter(const std::string &name)
    {
        for (auto &p : params_)
            if (p.name == name)
                return p;
        throw std::invalid_argument("no parameter named '" + name + "'");
    }

    const Parameter &NetworkGraph::parameter(const std::string &name) const
    {
        return const_cast<NetworkGraph *>(this)->parameter(name);
    }

    std::size_t NetworkGraph::parameter_count() const
    {
        std::size_t n = 0;
        for (const auto &p : params_)
            n += p.value.size();
        return n;
    }

    void NetworkGraph::set_trainable(bool trainable)
    {
        for (auto &p : params_)
            p.trainable = trainable;
    }

    void NetworkGraph::round_parameters_to_float()
    {
        for (auto &p : params_)
            for (double &v : p.value.values())
                v = static_cast<double>(static_cast<float>(v));
    }

    void NetworkGraph::set_pilot_power(const std::string &pilot_layer, double power)
    {
        if (layer(node(pilot_layer)).kind != LayerKind::pilot)
            throw std::invalid_argument("'" + pilot_layer + "' is not a pilot layer");
        if (!(power > 0.0))
            throw std::invalid_argument("pilot power must be > 0");
        for (auto &e : pilot_power_)
            if (e.first == pilot_layer)
            {
                e.second = power;
                return;
            }
        pilot_power_.emplace_back(pilot_layer, power);
    }

    void NetworkGraph::project_pilots()
    {
        for (const auto &[name, power] : pilot_power_)
        {
            const LayerSpec &l = layer(node(name));
            auto &re = params_[static_cast<std::size_t>(l.weight)].value;
            auto &im = params_[static_cast<std::size_t>(l.bias)].value;
            std::vector<double> flat(re.values());
            flat.insert(flat.end(), im.values().begin(), im.values().end());
            nn::power_project(flat, l.antennas, l.pilot_len, power);
            std::copy_n(flat.begin(), re.size(), re.values().begin());
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(re.size()), im.size(), im.values().begin());
        }
    }

    void NetworkGraph::validate() const
    {
        for (const auto &l : layers_)
        {
            if (l.kind == LayerKind::dense)
            {
                const auto &w = params_.at(static_cast<std::size_t>(l.weight)).value;
                if (w.shape() != std::vector<std::size_t>{l.in, l.width})
                    throw std::invalid_argument("dense layer '" + l.name + "': weight shape mismatch");
                if (l.has_bias && params_.at(static_cast<std::size_t>(l.bias)).value.size() != l.width)
                    throw std::invalid_argument("dense layer '" + l.name + "': bias shape mismatch");
            }
        }
    }
}
