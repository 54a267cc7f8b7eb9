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

#include "pcenet/e2e_csi.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pce
{
    void E2EConfig::validate() const
    {
        auto fail = [](const std::string &m) { throw std::invalid_argument("E2E config: " + m); };
        if (antennas < 1)
            fail("N must be >= 1");
        if (pilot_len < 1 || pilot_len > antennas)
            fail("pilot length L must satisfy 1 <= L <= N");
        if (quant_bits < 1 || quant_bits > 24)
            fail("quantizer bits B must be in [1, 24]");
        if (feedback_bits < quant_bits || feedback_bits % quant_bits != 0)
            fail("N_bit (" + std::to_string(feedback_bits) + ") must be a positive multiple of B (" +
                 std::to_string(quant_bits) + ")");
        if (!(power > 0.0))
            fail("pilot power P must be > 0");
        if (residual_blocks < 1)
            fail("residual_blocks must be >= 1");
    }

    int add_compression(nn::NetworkGraph &g, int from, int codeword_len, int quant_bits)
    {
        const auto m = static_cast<std::size_t>(codeword_len);
        int h = g.dense("compress1", from, 2 * m, nn::Activation::sigmoid);
        h = g.dense("compress2", h, m, nn::Activation::sigmoid);
        return g.quantize(layer_names::codeword, h, quant_bits);
    }

    int add_reconstruction(nn::NetworkGraph &g, int from, int antennas, int blocks, const std::string &prefix,
                           std::size_t out_width)
    {
        const auto n = static_cast<std::size_t>(antennas);
        int x = g.dense(prefix + "init", from, 2 * n);
        for (int b = 0; b < blocks; ++b)
        {
            std::string p = prefix + "block" + std::to_string(b);
            int r = g.dense(p + ".fc1", x, 8 * n, nn::Activation::tanh);
            r = g.dense(p + ".fc2", r, 2 * n, nn::Activation::tanh);
            x = g.add(p + ".skip", x, r);
        }
        if (out_width > 0)
            x = g.dense(prefix + "out", x, out_width);
        return x;
    }

    nn::NetworkGraph build_e2e_graph(const E2EConfig &c)
    {
        c.validate();
        const auto n = static_cast<std::size_t>(c.antennas);
        const auto l = static_cast<std::size_t>(c.pilot_len);
        nn::NetworkGraph g;
        int h = g.input(layer_names::channel, 2 * n);
        int y = g.pilot(layer_names::pilot, h, n, l);
        y = g.awgn(layer_names::noise, y, {c.train_snr_db, false});
        int s = add_compression(g, y, c.codeword_len(), c.quant_bits);
        int out = add_reconstruction(g, s, c.antennas, c.residual_blocks, "rec.");
        g.set_output(out);
        g.set_pilot_power(layer_names::pilot, c.power);
        nn::glorot_init(g, c.train.seed);
        g.project_pilots();
        g.round_parameters_to_float();
        return g;
    }

    std::size_t e2e_parameter_count(const E2EConfig &c)
    {
        const std::size_t n = static_cast<std::size_t>(c.antennas), l = static_cast<std::size_t>(c.pilot_len);
        const std::size_t m = static_cast<std::size_t>(c.codeword_len());
        std::size_t pilot = 2 * n * l;
        std::size_t compress = (2 * l * 2 * m + 2 * m) + (2 * m * m + m);
        std::size_t init = m * 2 * n + 2 * n;
        std::size_t block = (2 * n * 8 * n + 8 * n) + (8 * n * 2 * n + 2 * n);
        return pilot + compress + init + static_cast<std::size_t>(c.residual_blocks) * block;
    }

    double PilotMatrix::column_power(std::size_t l) const
    {
        double p = 0.0;
        for (std::size_t n = 0; n < antennas; ++n)
            p += std::norm(at(n, l));
        return p;
    }

    Eigen::MatrixXcd PilotMatrix::matrix() const
    {
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(antennas), static_cast<Eigen::Index>(len));
        for (std::size_t n = 0; n < antennas; ++n)
            for (std::size_t l = 0; l < len; ++l)
                m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) = at(n, l);
        return m;
    }

    PilotMatrix pilot_from_row(std::span<const double> row, std::size_t antennas, std::size_t len)
    {
        if (row.size() != 2 * antennas * len)
            throw std::invalid_argument("pilot_from_row: expected 2*N*L values");
        PilotMatrix x{antennas, len, std::vector<cd>(antennas * len)};
        for (std::size_t i = 0; i < antennas * len; ++i)
            x.values[i] = {row[i], row[antennas * len + i]};
        return x;
    }

    PilotMatrix pilot_from_graph(const nn::NetworkGraph &graph, const std::string &layer)
    {
        const auto &spec = graph.layer(graph.node(layer));
        if (spec.kind != nn::LayerKind::pilot)
            throw std::invalid_argument("'" + layer + "' is not a pilot layer");
        const auto &re = graph.parameters()[static_cast<std::size_t>(spec.weight)].value;
        const auto &im = graph.parameters()[static_cast<std::size_t>(spec.bias)].value;
        std::vector<double> flat(re.values());
        flat.insert(flat.end(), im.values().begin(), im.values().end());
        return pilot_from_row(flat, spec.antennas, spec.pilot_len);
    }

    CVector simulate_pilot_reception(std::span<const cd> h, const PilotMatrix &x, std::optional<double> snr_db,
                                     std::uint64_t seed)
    {
        if (h.size() != x.antennas || x.len == 0)
            throw std::invalid_argument("simulate_pilot_reception: channel length " + std::to_string(h.size()) +
                                        " does not match pilot rows " + std::to_string(x.antennas));
        const std::size_t n = x.antennas, L = x.len;
        // Real/imaginary decomposition of y = h X, as the pilot layer computes it.
        std::vector<double> y(2 * L, 0.0);
        for (std::size_t l = 0; l < L; ++l)
        {
            double re = 0.0, im = 0.0;
            for (std::size_t k = 0; k < n; ++k)
            {
                const cd xv = x.at(k, l);
                re += h[k].real() * xv.real() - h[k].imag() * xv.imag();
                im += h[k].imag() * xv.real() + h[k].real() * xv.imag();
            }
            y[l] = re;
            y[L + l] = im;
        }
        auto noisy = nn::awgn_apply(y, snr_db, seed);
        CVector out(L);
        for (std::size_t l = 0; l < L; ++l)
            out[l] = {noisy[l], noisy[L + l]};
        return out;
    }

    nn::NumericArray channel_rows(const Dataset &ds, std::span<const std::size_t> idx, ChannelSelector which)
    {
        const auto n = static_cast<std::size_t>(ds.antennas);
        nn::NumericArray out = nn::NumericArray::matrix(idx.size(), 2 * n);
        for (std::size_t r = 0; r < idx.size(); ++r)
        {
            const auto &h = which == ChannelSelector::main ? ds.samples.at(idx[r]).h_main : ds.samples.at(idx[r]).h_side;
            for (std::size_t k = 0; k < n; ++k)
            {
                out.at(r, k) = h[k].real();
                out.at(r, n + k) = h[k].imag();
            }
        }
        return out;
    }

    CVector row_to_cvector(std::span<const double> row)
    {
        const std::size_t n = row.size() / 2;
        CVector h(n);
        for (std::size_t k = 0; k < n; ++k)
            h[k] = {row[k], row[n + k]};
        return h;
    }

    double to_db(double linear) { return linear > 0.0 ? 10.0 * std::log10(linear) : kNmseNegInfDb; }

    NmseResult nmse(std::span<const CVector> truth, std::span<const CVector> estimate)
    {
        if (truth.size() != estimate.size() || truth.empty())
            throw std::invalid_argument("nmse: sample counts differ or are zero");
        NmseResult r;
        for (std::size_t i = 0; i < truth.size(); ++i)
        {
            if (truth[i].size() != estimate[i].size())
                throw std::invalid_argument("nmse: vector lengths differ at sample " + std::to_string(i));
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < truth[i].size(); ++k)
            {
                num += std::norm(truth[i][k] - estimate[i][k]);
                den += std::norm(truth[i][k]);
            }
            if (den == 0.0)
                throw std::invalid_argument("nmse: zero-norm true channel at sample " + std::to_string(i));
            r.per_sample.push_back(num / den);
            r.linear += num / den;
        }
        r.linear /= static_cast<double>(truth.size());
        r.db = to_db(r.linear);
        return r;
    }

    NmseResult nmse_rows(const nn::NumericArray &truth, const nn::NumericArray &estimate)
    {
        if (truth.shape() != estimate.shape() || truth.rank() != 2)
            throw std::invalid_argument("nmse: shapes differ");
        std::vector<CVector> t, e;
        for (std::size_t r = 0; r < truth.rows(); ++r)
        {
            t.push_back(row_to_cvector(truth.row(r)));
            e.push_back(row_to_cvector(estimate.row(r)));
        }
        return nmse(t, e);
    }

    TrainHistory train_e2e(nn::NetworkGraph &graph, const Dataset &ds, ChannelSelector which, const E2EConfig &config)
    {
        config.validate();
        auto train_idx = ds.indices(Split::train);
        if (train_idx.empty())
            throw std::invalid_argument("train_e2e: empty training split");
        auto val_idx = ds.indices(Split::val);

        SupervisedSet train{{channel_rows(ds, train_idx, which)}, channel_rows(ds, train_idx, which)};
        SupervisedSet val;
        if (!val_idx.empty())
            val = {{channel_rows(ds, val_idx, which)}, channel_rows(ds, val_idx, which)};

        TrainConfig tc = config.train;
        tc.train_snr_db = config.train_snr_db;
        return fit(graph, train, val, tc, Metric::nmse);
    }

    NmseResult evaluate_pipeline(const nn::NetworkGraph &graph, const Dataset &ds, Split split, ChannelSelector which,
                                 std::optional<double> test_snr_db, std::uint64_t seed)
    {
        auto idx = ds.indices(split);
        if (idx.empty())
            throw std::invalid_argument(std::string("evaluate_pipeline: split '") + split_name(split) + "' is empty");
        nn::NumericArray h = channel_rows(ds, idx, which);
        nn::NumericArray est = predict(graph, std::span<const nn::NumericArray>(&h, 1), test_snr_db, seed);
        return nmse_rows(h, est);
    }

    CVector ls_estimate(std::span<const cd> y, const PilotMatrix &x)
    {
        if (y.size() != x.len)
            throw std::invalid_argument("ls_estimate: y length must equal pilot length");
        // h X = y  <=>  X^T h^T = y^T; the orthogonal decomposition yields the
        // minimum-norm least-squares solution.
        Eigen::MatrixXcd xt = x.matrix().transpose();
        Eigen::VectorXcd yt(static_cast<Eigen::Index>(y.size()));
        for (std::size_t l = 0; l < y.size(); ++l)
            yt(static_cast<Eigen::Index>(l)) = y[l];
        Eigen::VectorXcd h = xt.completeOrthogonalDecomposition().solve(yt);
        return CVector(h.data(), h.data() + h.size());
    }

    ChannelStatistics channel_statistics(const Dataset &ds, Split split, ChannelSelector which)
    {
        auto idx = ds.indices(split);
        if (idx.empty())
            throw std::invalid_argument("channel_statistics: empty split");
        const auto n = static_cast<Eigen::Index>(ds.antennas);
        ChannelStatistics s;
        s.mean = Eigen::RowVectorXcd::Zero(n);
        s.cov = Eigen::MatrixXcd::Zero(n, n);
        std::vector<Eigen::RowVectorXcd> hs;
        for (std::size_t i : idx)
        {
            const auto &h = which == ChannelSelector::main ? ds.samples[i].h_main : ds.samples[i].h_side;
            Eigen::RowVectorXcd v(n);
            for (Eigen::Index k = 0; k < n; ++k)
                v(k) = cd(h[static_cast<std::size_t>(k)].real(), h[static_cast<std::size_t>(k)].imag());
            s.mean += v;
            hs.push_back(std::move(v));
        }
        s.mean /= static_cast<double>(hs.size());
        for (const auto &v : hs)
        {
            Eigen::RowVectorXcd d = v - s.mean;
            s.cov += d.adjoint() * d;
        }
        s.cov /= static_cast<double>(hs.size());
        return s;
    }

    CVector mmse_estimate(std::span<const cd> y, const PilotMatrix &x, double noise_var, const ChannelStatistics &stats)
    {
        const auto n = static_cast<Eigen::Index>(x.antennas), L = static_cast<Eigen::Index>(x.len);
        if (static_cast<Eigen::Index>(y.size()) != L || stats.mean.size() != n || stats.cov.rows() != n)
            throw std::invalid_argument("mmse_estimate: dimension mismatch");
        if (!(noise_var >= 0.0))
            throw std::invalid_argument("mmse_estimate: noise variance must be >= 0");
        Eigen::MatrixXcd X = x.matrix();
        Eigen::RowVectorXcd yv(L);
        for (Eigen::Index l = 0; l < L; ++l)
            yv(l) = y[static_cast<std::size_t>(l)];
        Eigen::MatrixXcd xhc = X.adjoint() * stats.cov; // L x N
        Eigen::MatrixXcd inner = xhc * X + noise_var * Eigen::MatrixXcd::Identity(L, L);
        // w = resid A^{-1}  <=>  A^T w^T = resid^T
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(inner.transpose());
        if (!lu.isInvertible())
            throw NumericError("mmse_estimate: X^H C X + sigma^2 I is singular");
        Eigen::RowVectorXcd h;
        Eigen::FullPivLU<Eigen::MatrixXcd> xlu(X);
        if (L == n && xlu.isInvertible())
        {
            // Same estimator written around the LS estimate:
            //   h = h_ls - (h_ls - mean) (C + R)^{-1} R,  R = sigma^2 (X X^H)^{-1}.
            // It stays accurate for ill-conditioned C as sigma^2 -> 0.
            Eigen::MatrixXcd xinv = xlu.inverse();
            Eigen::RowVectorXcd h_ls = yv * xinv;
            h = h_ls;
            if (noise_var > 0.0)
            {
                Eigen::MatrixXcd r = noise_var * (xinv * xinv.adjoint());
                Eigen::MatrixXcd m = stats.cov + r;
                Eigen::FullPivLU<Eigen::MatrixXcd> mlu(m.transpose());
                Eigen::RowVectorXcd z = mlu.solve((h_ls - stats.mean).transpose()).transpose();
                h -= z * r;
            }
        }
        else
        {
            Eigen::RowVectorXcd resid = yv - stats.mean * X;
            Eigen::RowVectorXcd w = lu.solve(resid.transpose()).transpose();
            h = stats.mean + w * xhc;
        }
        for (Eigen::Index k = 0; k < n; ++k)
            if (!std::isfinite(h(k).real()) || !std::isfinite(h(k).imag()))
                throw NumericError("mmse_estimate: non-finite estimate");
        return CVector(h.data(), h.data() + h.size());
    }

    PilotMatrix baseline_pilot(int antennas, int len, double power)
    {
        if (antennas < 1 || len < 1 || len > antennas)
            throw std::invalid_argument("baseline_pilot: need 1 <= L <= N");
        const auto n = static_cast<std::size_t>(antennas), L = static_cast<std::size_t>(len);
        PilotMatrix x{n, L, std::vector<cd>(n * L)};
        const double s = std::sqrt(power);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = 0; l < L; ++l)
            {
                if (L == n)
                    x.at(k, l) = k == l ? cd(s, 0.0) : cd(0.0, 0.0);
                else
                {
                    double frac = static_cast<double>((k * l) % n) / static_cast<double>(n);
                    x.at(k, l) = std::polar(s / std::sqrt(static_cast<double>(n)), -2.0 * std::numbers::pi * frac);
                }
            }
        return x;
    }

    namespace
    {
        std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
        {
            std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }
    }

    NmseResult evaluate_baseline(Baseline kind, const Dataset &ds, Split split, ChannelSelector which, int pilot_len,
                                 double power, std::optional<double> test_snr_db, std::uint64_t seed)
    {
        auto idx = ds.indices(split);
        if (idx.empty())
            throw std::invalid_argument(std::string("evaluate_baseline: split '") + split_name(split) + "' is empty");
        PilotMatrix x = baseline_pilot(ds.antennas, pilot_len, power);
        std::optional<ChannelStatistics> stats;
        if (kind == Baseline::mmse)
            stats = channel_statistics(ds, Split::train, which);

        std::vector<CVector> truth, est;
        for (std::size_t i : idx)
        {
            CVector h = to_cvector(which == ChannelSelector::main ? ds.samples[i].h_main : ds.samples[i].h_side);
            CVector y = simulate_pilot_reception(h, x, test_snr_db, mix_seed(seed, i));
            if (kind == Baseline::ls)
                est.push_back(ls_estimate(y, x));
            else
            {
                double noise_var = 0.0;
                if (test_snr_db.has_value() && std::isfinite(*test_snr_db))
                {
                    CVector clean = simulate_pilot_reception(h, x, std::nullopt, 0);
                    double p = 0.0;
                    for (const cd &v : clean)
                        p += std::norm(v);
                    noise_var = p / static_cast<double>(x.len) / std::pow(10.0, *test_snr_db / 10.0);
                }
                est.push_back(mmse_estimate(y, x, noise_var, *stats));
            }
            truth.push_back(std::move(h));
        }
        return nmse(truth, est);
    }
}
