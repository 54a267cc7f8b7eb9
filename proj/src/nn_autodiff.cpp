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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pce::nn
{
    namespace
    {
        using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        using MapM = Eigen::Map<RowMat>;
        using CMapM = Eigen::Map<const RowMat>;
        using CMapV = Eigen::Map<const Eigen::RowVectorXd>;

        CMapM view(const NumericArray &a, std::size_t rows, std::size_t cols)
        {
            return CMapM(a.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        }

        MapM view(NumericArray &a, std::size_t rows, std::size_t cols)
        {
            return MapM(a.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        }

        NumericArray as_batch(const NumericArray &in, const LayerSpec &layer)
        {
            if (in.rank() == 1 && in.size() == layer.width)
                return NumericArray({1, layer.width}, in.values());
            if (in.rank() != 2 || in.cols() != layer.width)
            {
                std::string got;
                for (std::size_t d : in.shape())
                    got += (got.empty() ? "" : "x") + std::to_string(d);
                throw std::invalid_argument("input shape mismatch at layer '" + layer.name + "': expected [batch, " +
                                            std::to_string(layer.width) + "], got [" + got + "]");
            }
            return in;
        }

        double activate(Activation a, double x)
        {
            switch (a)
            {
            case Activation::tanh:
                return std::tanh(x);
            case Activation::sigmoid:
                return 1.0 / (1.0 + std::exp(-x));
            case Activation::relu:
                return x > 0.0 ? x : 0.0;
            }
            return x;
        }

        // Derivative expressed through the activation output y.
        double activate_grad(Activation a, double y)
        {
            switch (a)
            {
            case Activation::tanh:
                return 1.0 - y * y;
            case Activation::sigmoid:
                return y * (1.0 - y);
            case Activation::relu:
                return y > 0.0 ? 1.0 : 0.0;
            }
            return 1.0;
        }

        // y = h X for one sample; h = [hr(N), hi(N)], X flattened [Xr, Xi].
        void complex_rowvec_times(const double *h, const double *x, double *y, std::size_t n, std::size_t l)
        {
            CMapV hr(h, static_cast<Eigen::Index>(n)), hi(h + n, static_cast<Eigen::Index>(n));
            CMapM xr(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
            CMapM xi(x + n * l, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
            Eigen::Map<Eigen::RowVectorXd> yr(y, static_cast<Eigen::Index>(l)), yi(y + l, static_cast<Eigen::Index>(l));
            yr.noalias() = hr * xr - hi * xi;
            yi.noalias() = hi * xr + hr * xi;
        }
    }

    const NumericArray &Activations::output() const
    {
        if (values.empty())
            throw StateError("no forward cache");
        if (graph == nullptr || graph->layers().empty())
            return values.back();
        return values.at(static_cast<std::size_t>(graph->output_node()));
    }

    const NumericArray &Activations::at(const std::string &node_name) const
    {
        if (values.empty() || graph == nullptr)
            throw StateError("no forward cache");
        return values.at(static_cast<std::size_t>(graph->node(node_name)));
    }

    Activations forward(const NetworkGraph &graph, const NumericArray &input, const ForwardOptions &opts)
    {
        return forward(graph, std::span<const NumericArray>(&input, 1), opts);
    }

    Activations forward(const NetworkGraph &graph, std::span<const NumericArray> inputs, const ForwardOptions &opts)
    {
        Activations act;
        act.graph = &graph;
        const auto &layers = graph.layers();
        if (layers.empty())
        {
            if (inputs.size() != 1)
                throw std::invalid_argument("empty graph takes exactly one input");
            act.values.push_back(inputs[0]);
            act.batch = inputs[0].rows();
            return act;
        }

        const auto input_ids = graph.input_nodes();
        if (inputs.size() != input_ids.size())
            throw std::invalid_argument("graph expects " + std::to_string(input_ids.size()) + " inputs, got " +
                                        std::to_string(inputs.size()));

        const auto &params = graph.parameters();
        act.values.resize(layers.size());
        std::size_t next_input = 0;
        std::size_t batch = 0;

        for (std::size_t li = 0; li < layers.size(); ++li)
        {
            const LayerSpec &l = layers[li];
            NumericArray &out = act.values[li];
            auto in = [&](std::size_t k) -> const NumericArray & { return act.values[static_cast<std::size_t>(l.inputs[k])]; };

            if (l.kind == LayerKind::input)
            {
                out = as_batch(inputs[next_input++], l);
                if (batch == 0)
                    batch = out.rows();
                else if (out.rows() != batch)
                    throw std::invalid_argument("input shape mismatch at layer '" + l.name + "': batch size differs");
                out.check_finite("input '" + l.name + "'");
                continue;
            }

            out = NumericArray::matrix(batch, l.width);
            switch (l.kind)
            {
            case LayerKind::dense:
            {
                const auto &w = params[static_cast<std::size_t>(l.weight)].value;
                auto y = view(out, batch, l.width);
                y.noalias() = view(in(0), batch, l.in) * view(w, l.in, l.width);
                if (l.has_bias)
                    y.rowwise() += CMapV(params[static_cast<std::size_t>(l.bias)].value.data(),
                                         static_cast<Eigen::Index>(l.width));
                break;
            }
            case LayerKind::activation:
            {
                const auto &x = in(0).values();
                auto &y = out.values();
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] = activate(l.activation, x[i]);
                break;
            }
            case LayerKind::quantize:
            {
                const auto &x = in(0).values();
                auto &y = out.values();
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] = quantize_value(x[i], l.bits);
                break;
            }
            case LayerKind::awgn:
            {
                out = in(0);
                bool enabled = l.awgn.snr_db.has_value() &&
                               (opts.snr_override_db.has_value() || opts.mode == Mode::train || l.awgn.always_on);
                if (enabled)
                {
                    if (opts.rng == nullptr)
                        throw std::invalid_argument("awgn layer '" + l.name + "' needs a random engine");
                    double snr = opts.snr_override_db.value_or(*l.awgn.snr_db);
                    for (std::size_t r = 0; r < batch; ++r)
                        awgn_apply(out.row(r), snr, *opts.rng);
                }
                break;
            }
            case LayerKind::power_project:
            {
                out = in(0);
                for (std::size_t r = 0; r < batch; ++r)
                    power_project(out.row(r), l.antennas, l.pilot_len, l.power);
                break;
            }
            case LayerKind::concat:
            {
                std::size_t offset = 0;
                for (std::size_t k = 0; k < l.inputs.size(); ++k)
                {
                    const NumericArray &src = in(k);
                    std::size_t w = src.cols();
                    for (std::size_t r = 0; r < batch; ++r)
                        std::copy_n(src.row(r).begin(), w, out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
                    offset += w;
                }
                break;
            }
            case LayerKind::add:
            {
                const auto &a = in(0).values(), &b = in(1).values();
                auto &y = out.values();
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] = a[i] + b[i];
                break;
            }
            case LayerKind::pilot:
            {
                const std::size_t n = l.antennas, L = l.pilot_len;
                const auto &h = in(0);
                auto hr = view(h, batch, 2 * n).leftCols(static_cast<Eigen::Index>(n));
                auto hi = view(h, batch, 2 * n).rightCols(static_cast<Eigen::Index>(n));
                auto xr = view(params[static_cast<std::size_t>(l.weight)].value, n, L);
                auto xi = view(params[static_cast<std::size_t>(l.bias)].value, n, L);
                auto y = view(out, batch, 2 * L);
                y.leftCols(static_cast<Eigen::Index>(L)).noalias() = hr * xr - hi * xi;
                y.rightCols(static_cast<Eigen::Index>(L)).noalias() = hi * xr + hr * xi;
                break;
            }
            case LayerKind::transmit:
            {
                for (std::size_t r = 0; r < batch; ++r)
                    complex_rowvec_times(in(0).row(r).data(), in(1).row(r).data(), out.row(r).data(), l.antennas,
                                         l.pilot_len);
                break;
            }
            case LayerKind::input:
                break;
            }
            out.check_finite(std::string(kind_name(l.kind)) + " layer '" + l.name + "'");
        }
        act.batch = batch;
        return act;
    }

    Gradients backward(const NetworkGraph &graph, const Activations &cache, const NumericArray &output_grad)
    {
        if (cache.empty() || cache.graph != &graph)
            throw StateError("backward called without a forward cache for this graph");

        Gradients g;
        const auto &layers = graph.layers();
        if (layers.empty())
        {
            g.inputs.push_back(output_grad);
            return g;
        }
        const auto &params = graph.parameters();
        const std::size_t batch = cache.batch;
        const int out_node = graph.output_node();
        const NumericArray &y_out = cache.values[static_cast<std::size_t>(out_node)];
        if (output_grad.size() != y_out.size())
            throw std::invalid_argument("output gradient has " + std::to_string(output_grad.size()) +
                                        " values, output has " + std::to_string(y_out.size()));

        g.params.reserve(params.size());
        for (const auto &p : params)
            g.params.emplace_back(p.value.shape(), 0.0);

        std::vector<NumericArray> node_grad(layers.size());
        node_grad[static_cast<std::size_t>(out_node)] = NumericArray({batch, y_out.cols()}, output_grad.values());

        auto accumulate = [&](int node) -> NumericArray &
        {
            auto &ng = node_grad[static_cast<std::size_t>(node)];
            if (ng.size() == 0)
                ng = NumericArray::matrix(batch, layers[static_cast<std::size_t>(node)].width);
            return ng;
        };

        for (std::size_t li = layers.size(); li-- > 0;)
        {
            const LayerSpec &l = layers[li];
            const NumericArray &gy = node_grad[li];
            if (gy.size() == 0 || l.kind == LayerKind::input)
                continue;
            const NumericArray &y = cache.values[li];
            auto in = [&](std::size_t k) -> const NumericArray & { return cache.values[static_cast<std::size_t>(l.inputs[k])]; };

            switch (l.kind)
            {
            case LayerKind::dense:
            {
                const auto &w = params[static_cast<std::size_t>(l.weight)].value;
                auto G = view(gy, batch, l.width);
                auto X = view(in(0), batch, l.in);
                view(g.params[static_cast<std::size_t>(l.weight)], l.in, l.width).noalias() += X.transpose() * G;
                if (l.has_bias)
                {
                    auto &gb = g.params[static_cast<std::size_t>(l.bias)];
                    Eigen::Map<Eigen::RowVectorXd>(gb.data(), static_cast<Eigen::Index>(l.width)) += G.colwise().sum();
                }
                view(accumulate(l.inputs[0]), batch, l.in).noalias() += G * view(w, l.in, l.width).transpose();
                break;
            }
            case LayerKind::activation:
            {
                auto &gx = accumulate(l.inputs[0]).values();
                for (std::size_t i = 0; i < gx.size(); ++i)
                    gx[i] += gy[i] * activate_grad(l.activation, y[i]);
                break;
            }
            case LayerKind::quantize:
            case LayerKind::awgn:
            {
                // Straight-through: identity on gradients.
                auto &gx = accumulate(l.inputs[0]).values();
                for (std::size_t i = 0; i < gx.size(); ++i)
                    gx[i] += gy[i];
                break;
            }
            case LayerKind::power_project:
            {
                const std::size_t n = l.antennas, L = l.pilot_len;
                const double s = std::sqrt(l.power);
                NumericArray &gx = accumulate(l.inputs[0]);
                const NumericArray &x = in(0);
                for (std::size_t r = 0; r < batch; ++r)
                {
                    auto xr = x.row(r);
                    auto grow = gy.row(r);
                    auto gxr = gx.row(r);
                    for (std::size_t c = 0; c < L; ++c)
                    {
                        double norm2 = 0.0, dot = 0.0;
                        for (std::size_t k = 0; k < n; ++k)
                        {
                            std::size_t re = k * L + c, im = n * L + k * L + c;
                            norm2 += xr[re] * xr[re] + xr[im] * xr[im];
                        }
                        if (norm2 == 0.0)
                            continue; // replaced by a constant
                        double norm = std::sqrt(norm2);
                        for (std::size_t k = 0; k < n; ++k)
                        {
                            std::size_t re = k * L + c, im = n * L + k * L + c;
                            dot += xr[re] * grow[re] + xr[im] * grow[im];
                        }
                        dot /= norm2;
                        for (std::size_t k = 0; k < n; ++k)
                        {
                            std::size_t re = k * L + c, im = n * L + k * L + c;
                            gxr[re] += s / norm * (grow[re] - xr[re] * dot);
                            gxr[im] += s / norm * (grow[im] - xr[im] * dot);
                        }
                    }
                }
                break;
            }
            case LayerKind::concat:
            {
                std::size_t offset = 0;
                for (std::size_t k = 0; k < l.inputs.size(); ++k)
                {
                    NumericArray &gx = accumulate(l.inputs[k]);
                    std::size_t w = gx.cols();
                    for (std::size_t r = 0; r < batch; ++r)
                    {
                        auto src = gy.row(r);
                        auto dst = gx.row(r);
                        for (std::size_t c = 0; c < w; ++c)
                            dst[c] += src[offset + c];
                    }
                    offset += w;
                }
                break;
            }
            case LayerKind::add:
            {
                for (int src : l.inputs)
                {
                    auto &gx = accumulate(src).values();
                    for (std::size_t i = 0; i < gx.size(); ++i)
                        gx[i] += gy[i];
                }
                break;
            }
            case LayerKind::pilot:
            {
                const std::size_t n = l.antennas, L = l.pilot_len;
                const auto nn_ = static_cast<Eigen::Index>(n), LL = static_cast<Eigen::Index>(L);
                auto H = view(in(0), batch, 2 * n);
                auto G = view(gy, batch, 2 * L);
                auto xr = view(params[static_cast<std::size_t>(l.weight)].value, n, L);
                auto xi = view(params[static_cast<std::size_t>(l.bias)].value, n, L);
                auto hr = H.leftCols(nn_), hi = H.rightCols(nn_);
                auto gr = G.leftCols(LL), gi = G.rightCols(LL);
                view(g.params[static_cast<std::size_t>(l.weight)], n, L).noalias() +=
                    hr.transpose() * gr + hi.transpose() * gi;
                view(g.params[static_cast<std::size_t>(l.bias)], n, L).noalias() +=
                    hr.transpose() * gi - hi.transpose() * gr;
                auto GX = view(accumulate(l.inputs[0]), batch, 2 * n);
                GX.leftCols(nn_).noalias() += gr * xr.transpose() + gi * xi.transpose();
                GX.rightCols(nn_).noalias() += gi * xr.transpose() - gr * xi.transpose();
                break;
            }
            case LayerKind::transmit:
            {
                const std::size_t n = l.antennas, L = l.pilot_len;
                NumericArray &gh = accumulate(l.inputs[0]);
                NumericArray &gx = accumulate(l.inputs[1]);
                for (std::size_t r = 0; r < batch; ++r)
                {
                    auto h = in(0).row(r);
                    auto x = in(1).row(r);
                    auto gyr = gy.row(r);
                    auto ghr = gh.row(r);
                    auto gxr = gx.row(r);
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        double hre = h[k], him = h[n + k];
                        double accr = 0.0, acci = 0.0;
                        for (std::size_t c = 0; c < L; ++c)
                        {
                            double gre = gyr[c], gim = gyr[L + c];
                            double xre = x[k * L + c], xim = x[n * L + k * L + c];
                            gxr[k * L + c] += hre * gre + him * gim;
                            gxr[n * L + k * L + c] += hre * gim - him * gre;
                            accr += gre * xre + gim * xim;
                            acci += gim * xre - gre * xim;
                        }
                        ghr[k] += accr;
                        ghr[n + k] += acci;
                    }
                }
                break;
            }
            case LayerKind::input:
                break;
            }
        }

        for (int id : graph.input_nodes())
        {
            auto &ng = node_grad[static_cast<std::size_t>(id)];
            if (ng.size() == 0)
                ng = NumericArray::matrix(batch, layers[static_cast<std::size_t>(id)].width);
            g.inputs.push_back(std::move(ng));
        }
        return g;
    }
}
