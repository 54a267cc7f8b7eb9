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

#ifndef PCENET_NN_HPP
#define PCENET_NN_HPP

// Minimal reverse-mode engine for acyclic graphs of dense layers.
//
// Activations are row-major [batch, width] arrays. Complex vectors travel as
// [Re(v), Im(v)] halves; a complex N x L pilot matrix is flattened as
// [Re(X) row-major, Im(X) row-major], so column l of X is the set of entries
// (n, l) in both halves.

#include "pcenet/error.hpp"

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pce::nn
{
    class NumericArray
    {
    public:
        NumericArray() = default;
        explicit NumericArray(std::vector<std::size_t> shape, double fill = 0.0);
        NumericArray(std::vector<std::size_t> shape, std::vector<double> values);

        static NumericArray matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        {
            return NumericArray({rows, cols}, fill);
        }

        const std::vector<std::size_t> &shape() const { return shape_; }
        std::size_t rank() const { return shape_.size(); }
        std::size_t size() const { return values_.size(); }
        std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
        // Row width of a rank-2 array.
        std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

        double *data() { return values_.data(); }
        const double *data() const { return values_.data(); }
        std::vector<double> &values() { return values_; }
        const std::vector<double> &values() const { return values_; }
        double &operator[](std::size_t i) { return values_[i]; }
        double operator[](std::size_t i) const { return values_[i]; }
        double &at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
        double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
        std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
        std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

        // Rows `idx` of a rank-2 array, in order.
        NumericArray gather_rows(std::span<const std::size_t> idx) const;

        // Throws NumericError naming `where` on the first NaN/Inf.
        void check_finite(const std::string &where) const;

        bool operator==(const NumericArray &) const = default;

    private:
        std::vector<std::size_t> shape_;
        std::vector<double> values_;
    };

    enum class Activation
    {
        tanh,
        sigmoid,
        relu
    };

    enum class LayerKind
    {
        input,         // graph input of fixed width
        dense,         // y = x W (+ b)
        activation,    // elementwise tanh | sigmoid | relu
        quantize,      // B-bit uniform quantizer, straight-through gradient
        awgn,          // additive noise on a complex [Re, Im] vector, identity gradient
        power_project, // rescales every pilot column to squared norm P
        concat,        // feature-axis concatenation of several branches
        add,           // residual skip: x + y
        pilot,         // y = h X for a trainable complex X (two bias-free FC layers)
        transmit       // y = h X with X supplied per sample by another branch
    };

    const char *kind_name(LayerKind kind);

    // Noise injection policy of an awgn layer. `snr_db` empty = bypass.
    struct AwgnSpec
    {
        std::optional<double> snr_db;
        bool always_on = false;
    };

    struct LayerSpec
    {
        LayerKind kind = LayerKind::input;
        std::string name;
        std::vector<int> inputs; // producing node indices
        std::size_t width = 0;   // output width per sample

        std::size_t in = 0; // dense
        bool has_bias = true;
        Activation activation = Activation::tanh;
        int bits = 0;
        AwgnSpec awgn;
        double power = 1.0;     // power_project
        std::size_t antennas = 0, pilot_len = 0; // pilot, transmit, power_project

        int weight = -1, bias = -1; // parameter indices (pilot: weight = Re, bias = Im)
    };

    struct Parameter
    {
        std::string name;
        NumericArray value;
        bool trainable = true;
        std::size_t fan_in = 0, fan_out = 0; // 0 = not Glorot-initialized (biases)
    };

    class NetworkGraph
    {
    public:
        int input(const std::string &name, std::size_t width);
        int dense(const std::string &name, int from, std::size_t out, bool bias = true);
        int activation(const std::string &name, int from, Activation act);
        // dense followed by an activation named `name + ".act"`; returns the activation node.
        int dense(const std::string &name, int from, std::size_t out, Activation act, bool bias = true);
        int quantize(const std::string &name, int from, int bits);
        int awgn(const std::string &name, int from, AwgnSpec spec);
        int power_project(const std::string &name, int from, std::size_t antennas, std::size_t pilot_len, double power);
        int concat(const std::string &name, std::initializer_list<int> from);
        int concat(const std::string &name, const std::vector<int> &from);
        int add(const std::string &name, int a, int b);
        int pilot(const std::string &name, int from, std::size_t antennas, std::size_t pilot_len);
        int transmit(const std::string &name, int channel, int pilot, std::size_t antennas, std::size_t pilot_len);

        // Output defaults to the last node added.
        void set_output(int node);
        int output_node() const;
        std::size_t output_width() const { return layers_.at(static_cast<std::size_t>(output_node())).width; }

        const std::vector<LayerSpec> &layers() const { return layers_; }
        const LayerSpec &layer(int node) const { return layers_.at(static_cast<std::size_t>(node)); }
        int node(const std::string &name) const;
        bool has_node(const std::string &name) const;
        std::vector<int> input_nodes() const;
        std::size_t count(LayerKind kind) const;

        std::vector<Parameter> &parameters() { return params_; }
        const std::vector<Parameter> &parameters() const { return params_; }
        Parameter &parameter(const std::string &name);
        const Parameter &parameter(const std::string &name) const;
        std::size_t parameter_count() const;

        void set_trainable(bool trainable);
        // Rounds every parameter to the nearest float32 (training stores parameters in 32 bits).
        void round_parameters_to_float();
        // Rescales pilot-layer columns to their configured power (projection after an optimizer step).
        void set_pilot_power(const std::string &pilot_layer, double power);
        void project_pilots();

        // Structural check; throws std::invalid_argument.
        void validate() const;

    private:
        int push(LayerSpec spec);
        int add_param(const std::string &name, std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out);
        std::size_t width_of(int node, const std::string &who) const;

        std::vector<LayerSpec> layers_;
        std::vector<Parameter> params_;
        std::vector<std::pair<std::string, double>> pilot_power_;
        int output_ = -1;
    };

    enum class Mode
    {
        train,
        eval
    };

    struct ForwardOptions
    {
        Mode mode = Mode::eval;
        std::mt19937_64 *rng = nullptr; // required when any awgn layer injects noise
        // Enables noise at this SNR on every non-bypassed awgn layer, in any mode.
        std::optional<double> snr_override_db;
    };

    struct Activations
    {
        const NetworkGraph *graph = nullptr;
        std::size_t batch = 0;
        std::vector<NumericArray> values; // one per node

        bool empty() const { return values.empty(); }
        const NumericArray &output() const;
        const NumericArray &at(const std::string &node_name) const;
    };

    // `inputs` follow the declaration order of the graph's input nodes. An
    // empty graph (no layers) is the identity on its single input.
    Activations forward(const NetworkGraph &graph, std::span<const NumericArray> inputs, const ForwardOptions &opts = {});
    Activations forward(const NetworkGraph &graph, const NumericArray &input, const ForwardOptions &opts = {});

    struct Gradients
    {
        std::vector<NumericArray> params; // aligned with graph.parameters()
        std::vector<NumericArray> inputs; // aligned with graph.input_nodes()
    };

    Gradients backward(const NetworkGraph &graph, const Activations &cache, const NumericArray &output_grad);

    // Weights ~ U(-sqrt(6/(fan_in+fan_out)), +...), biases zero. Draws are
    // float32-representable.
    void glorot_init(NetworkGraph &graph, std::uint64_t seed);

    struct AdamState
    {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        long step = 0;
        std::vector<NumericArray> m, v;
    };

    AdamState make_adam(const std::vector<Parameter> &params, double lr);
    void adam_step(AdamState &state, std::vector<Parameter> &params, const std::vector<NumericArray> &grads);

    // (floor(clamp(x)*2^B) + 0.5) / 2^B with the floor capped at 2^B - 1.
    double quantize_value(double x, int bits);
    NumericArray quantize_ste(const NumericArray &x, int bits);

    // Level index in [0, 2^B) of a quantizer midpoint; throws if `level` is not one.
    std::uint32_t level_index(double level, int bits);
    // MSB-first bit string of the level indices.
    std::vector<std::uint8_t> encode_codeword(std::span<const double> levels, int bits);
    std::vector<double> decode_codeword(std::span<const std::uint8_t> bitstring, int bits);

    // One complex vector stored as [Re(L), Im(L)]. Noise variance per complex
    // entry = (||signal||^2 / L) / 10^(snr/10), split equally between parts.
    void awgn_apply(std::span<double> signal, std::optional<double> snr_db, std::mt19937_64 &rng);
    std::vector<double> awgn_apply(std::span<const double> signal, std::optional<double> snr_db, std::uint64_t seed);

    // Rescales each complex column of a flattened N x L pilot to squared norm
    // P; all-zero columns become sqrt(P) e_0.
    void power_project(std::span<double> pilot, std::size_t antennas, std::size_t pilot_len, double power);

    // PCEW checkpoint of a graph's parameter store (float32 payload).
    std::vector<unsigned char> encode_parameters(const NetworkGraph &graph);
    // Loads values into an identically structured graph; names and shapes must match.
    void decode_parameters(NetworkGraph &graph, const std::vector<unsigned char> &bytes);
    void save_parameters(const NetworkGraph &graph, const std::string &path);
    void load_parameters(NetworkGraph &graph, const std::string &path);
}

#endif
