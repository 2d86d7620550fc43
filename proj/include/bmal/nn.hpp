// SPDX-License-Identifier: Apache-2.0
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

// Small dense-network toolkit: affine layers, ReLU MLPs with recorded traces
// for reverse-mode gradients, softmax/cross-entropy and Adam.

#ifndef BMAL_NN_HPP
#define BMAL_NN_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bmal::nn
{
    struct Tensor
    {
        std::vector<std::size_t> shape;
        std::vector<double> value;
        std::vector<double> grad;

        Tensor() = default;
        explicit Tensor(std::vector<std::size_t> shape_);

        std::size_t size() const { return value.size(); }
        void zero_grad();
    };

    // y = W x + b with W stored row-major (out x in)
    class Dense
    {
    public:
        Dense() = default;
        Dense(int in, int out);

        int in() const { return in_; }
        int out() const { return out_; }

        void forward(std::span<const double> x, std::span<double> y) const;

        // Accumulates dL/dW and dL/db; writes dL/dx when `dx` is non-empty
        void backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx);

        Tensor weight;
        Tensor bias;

    private:
        int in_ = 0;
        int out_ = 0;
    };

    // Intermediate values of one MLP evaluation
    struct MlpTrace
    {
        std::vector<std::vector<double>> inputs; // input to each layer
        std::vector<double> output;
        bool recorded = false;
    };

    // Affine layers with ReLU between them and a linear output
    class Mlp
    {
    public:
        Mlp() = default;
        // sizes = {input, hidden..., output}
        explicit Mlp(std::vector<int> sizes);

        int in() const { return sizes_.front(); }
        int out() const { return sizes_.back(); }
        const std::vector<int> &sizes() const { return sizes_; }
        std::size_t layer_count() const { return layers_.size(); }
        const Dense &layer(std::size_t i) const { return layers_[i]; }
        Dense &layer(std::size_t i) { return layers_[i]; }

        void forward(std::span<const double> x, std::span<double> y) const;
        std::vector<double> forward(std::span<const double> x) const;

        // Forward pass that keeps what backward needs
        void forward(std::span<const double> x, MlpTrace &trace) const;

        // Throws StateError if `trace` was never recorded
        void backward(const MlpTrace &trace, std::span<const double> dy, std::span<double> dx);

        void init_glorot(std::mt19937_64 &rng);
        std::vector<Tensor *> parameters();
        std::vector<const Tensor *> parameters() const;

    private:
        std::vector<int> sizes_;
        std::vector<Dense> layers_;
    };

    // Max-subtracted softmax
    std::vector<double> softmax(std::span<const double> logits);

    // -log(max(probs[label], 1e-12))
    double cross_entropy(std::span<const double> probs, int label);

    inline constexpr double probability_floor = 1e-12;

    // dL/dlogits of cross_entropy(softmax(logits), label), added into `dlogits`
    void softmax_cross_entropy_grad(std::span<const double> probs, int label, std::span<double> dlogits);

    struct AdamState
    {
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
        std::int64_t step = 0;
        std::vector<std::vector<double>> m;
        std::vector<std::vector<double>> v;
    };

    // One bias-corrected Adam update using each tensor's grad buffer
    void adam_step(AdamState &state, std::span<Tensor *const> params);

    void zero_grads(std::span<Tensor *const> params);

    // Throws NumericError naming `where` if any value is NaN or infinite
    void check_finite(std::span<const double> values, const std::string &where);

    // Versioned binary parameter blob: "BMNN", u32 version, u32 tensor count,
    // per tensor (u32 rank, u64 dims...), then all values as little-endian f64
    void save_parameters(const std::string &path, std::span<const Tensor *const> params);

    // Loads into tensors of matching shapes; DimensionError on shape mismatch
    void load_parameters(const std::string &path, std::span<Tensor *const> params);
}

#endif
