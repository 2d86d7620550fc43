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

#include "bmal/nn.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bmal::nn
{
    Tensor::Tensor(std::vector<std::size_t> shape_) : shape(std::move(shape_))
    {
        const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
        value.assign(n, 0.0);
        grad.assign(n, 0.0);
    }

    void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    Dense::Dense(int in, int out)
        : weight({static_cast<std::size_t>(out), static_cast<std::size_t>(in)}),
          bias({static_cast<std::size_t>(out)}), in_(in), out_(out)
    {
        if (in < 1 || out < 1)
            throw InvalidInput("Dense: layer dimensions must be positive");
    }

    void Dense::forward(std::span<const double> x, std::span<double> y) const
    {
        if (x.size() != static_cast<std::size_t>(in_) || y.size() != static_cast<std::size_t>(out_))
            throw InvalidInput("Dense::forward: expected input " + std::to_string(in_) + ", got " + std::to_string(x.size()));
        const double *w = weight.value.data();
        for (int o = 0; o < out_; ++o)
        {
            const double *row = w + static_cast<std::size_t>(o) * in_;
            double acc = bias.value[o];
            for (int i = 0; i < in_; ++i)
                acc += row[i] * x[i];
            y[o] = acc;
        }
    }

    void Dense::backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx)
    {
        if (x.size() != static_cast<std::size_t>(in_) || dy.size() != static_cast<std::size_t>(out_))
            throw InvalidInput("Dense::backward: shape mismatch");
        if (!dx.empty() && dx.size() != static_cast<std::size_t>(in_))
            throw InvalidInput("Dense::backward: input-gradient buffer has wrong size");
        if (!dx.empty())
            std::fill(dx.begin(), dx.end(), 0.0);
        double *gw = weight.grad.data();
        const double *w = weight.value.data();
        for (int o = 0; o < out_; ++o)
        {
            const double g = dy[o];
            if (g == 0.0)
                continue;
            bias.grad[o] += g;
            double *grow = gw + static_cast<std::size_t>(o) * in_;
            for (int i = 0; i < in_; ++i)
                grow[i] += g * x[i];
            if (!dx.empty())
            {
                const double *row = w + static_cast<std::size_t>(o) * in_;
                for (int i = 0; i < in_; ++i)
                    dx[i] += g * row[i];
            }
        }
    }

    Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes))
    {
        if (sizes_.size() < 2)
            throw InvalidInput("Mlp: need at least input and output sizes");
        for (std::size_t i = 0; i + 1 < sizes_.size(); ++i)
            layers_.emplace_back(sizes_[i], sizes_[i + 1]);
    }

    void Mlp::forward(std::span<const double> x, std::span<double> y) const
    {
        std::vector<double> cur(x.begin(), x.end()), next;
        for (std::size_t l = 0; l < layers_.size(); ++l)
        {
            next.assign(layers_[l].out(), 0.0);
            layers_[l].forward(cur, next);
            if (l + 1 < layers_.size())
                for (auto &v : next)
                    v = std::max(v, 0.0);
            cur.swap(next);
        }
        if (y.size() != cur.size())
            throw InvalidInput("Mlp::forward: output buffer has wrong size");
        std::copy(cur.begin(), cur.end(), y.begin());
    }

    std::vector<double> Mlp::forward(std::span<const double> x) const
    {
        std::vector<double> y(out());
        forward(x, y);
        return y;
    }

    void Mlp::forward(std::span<const double> x, MlpTrace &trace) const
    {
        trace.inputs.resize(layers_.size());
        trace.inputs[0].assign(x.begin(), x.end());
        for (std::size_t l = 0; l < layers_.size(); ++l)
        {
            auto &dst = (l + 1 < layers_.size()) ? trace.inputs[l + 1] : trace.output;
            dst.assign(layers_[l].out(), 0.0);
            layers_[l].forward(trace.inputs[l], dst);
            if (l + 1 < layers_.size())
                for (auto &v : dst)
                    v = std::max(v, 0.0);
        }
        trace.recorded = true;
    }

    void Mlp::backward(const MlpTrace &trace, std::span<const double> dy, std::span<double> dx)
    {
        if (!trace.recorded)
            throw StateError("Mlp::backward called before a recorded forward pass");
        if (dy.size() != static_cast<std::size_t>(out()))
            throw InvalidInput("Mlp::backward: output gradient has wrong size");
        std::vector<double> grad(dy.begin(), dy.end()), prev;
        for (std::size_t l = layers_.size(); l-- > 0;)
        {
            if (l == 0)
            {
                layers_[0].backward(trace.inputs[0], grad, dx);
                break;
            }
            prev.assign(layers_[l].in(), 0.0);
            layers_[l].backward(trace.inputs[l], grad, prev);
            // inputs[l] is the ReLU output of layer l-1
            const auto &act = trace.inputs[l];
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (act[i] <= 0.0)
                    prev[i] = 0.0;
            grad.swap(prev);
        }
    }

    void Mlp::init_glorot(std::mt19937_64 &rng)
    {
        for (auto &layer : layers_)
        {
            const double limit = std::sqrt(6.0 / (layer.in() + layer.out()));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto &w : layer.weight.value)
                w = dist(rng);
            std::fill(layer.bias.value.begin(), layer.bias.value.end(), 0.0);
        }
    }

    std::vector<Tensor *> Mlp::parameters()
    {
        std::vector<Tensor *> p;
        for (auto &layer : layers_)
        {
            p.push_back(&layer.weight);
            p.push_back(&layer.bias);
        }
        return p;
    }

    std::vector<const Tensor *> Mlp::parameters() const
    {
        std::vector<const Tensor *> p;
        for (const auto &layer : layers_)
        {
            p.push_back(&layer.weight);
            p.push_back(&layer.bias);
        }
        return p;
    }

    std::vector<double> softmax(std::span<const double> logits)
    {
        if (logits.empty())
            throw InvalidInput("softmax: empty input");
        const double mx = *std::max_element(logits.begin(), logits.end());
        std::vector<double> p(logits.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i)
        {
            p[i] = std::exp(logits[i] - mx);
            sum += p[i];
        }
        for (auto &v : p)
            v /= sum;
        return p;
    }

    double cross_entropy(std::span<const double> probs, int label)
    {
        if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
            throw InvalidInput("cross_entropy: label " + std::to_string(label) + " out of range");
        return -std::log(std::max(probs[label], probability_floor));
    }

    void softmax_cross_entropy_grad(std::span<const double> probs, int label, std::span<double> dlogits)
    {
        if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
            throw InvalidInput("cross_entropy: label out of range");
        // Below the floor the loss is constant, so its gradient vanishes
        if (probs[label] < probability_floor)
            return;
        for (std::size_t i = 0; i < probs.size(); ++i)
            dlogits[i] += probs[i];
        dlogits[label] -= 1.0;
    }

    void zero_grads(std::span<Tensor *const> params)
    {
        for (auto *t : params)
            t->zero_grad();
    }

    void adam_step(AdamState &state, std::span<Tensor *const> params)
    {
        if (state.m.empty())
        {
            for (const auto *t : params)
            {
                state.m.emplace_back(t->size(), 0.0);
                state.v.emplace_back(t->size(), 0.0);
            }
        }
        if (state.m.size() != params.size())
            throw InvalidInput("adam_step: parameter count differs from optimizer state");
        for (std::size_t k = 0; k < params.size(); ++k)
            if (state.m[k].size() != params[k]->size() || params[k]->grad.size() != params[k]->size())
                throw InvalidInput("adam_step: parameter shape differs from optimizer state");

        ++state.step;
        const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
        const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
        for (std::size_t k = 0; k < params.size(); ++k)
        {
            auto &val = params[k]->value;
            const auto &g = params[k]->grad;
            auto &m = state.m[k];
            auto &v = state.v[k];
            for (std::size_t i = 0; i < val.size(); ++i)
            {
                m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
                v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
                const double m_hat = m[i] / c1;
                const double v_hat = v[i] / c2;
                val[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
            }
        }
    }

    void check_finite(std::span<const double> values, const std::string &where)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw NumericError("non-finite value at index " + std::to_string(i) + " in " + where);
    }

    namespace
    {
        constexpr char checkpoint_magic[] = "BMNN";
        constexpr std::uint32_t checkpoint_version = 1;
    }

    void save_parameters(const std::string &path, std::span<const Tensor *const> params)
    {
        io::ByteWriter w;
        w.put_bytes(std::string_view(checkpoint_magic, 4));
        w.put<std::uint32_t>(checkpoint_version);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
        for (const auto *t : params)
        {
            w.put<std::uint32_t>(static_cast<std::uint32_t>(t->shape.size()));
            for (auto d : t->shape)
                w.put<std::uint64_t>(d);
        }
        for (const auto *t : params)
            for (double v : t->value)
                w.put<double>(v);
        w.write_file(path);
    }

    void load_parameters(const std::string &path, std::span<Tensor *const> params)
    {
        auto r = io::ByteReader::from_file(path);
        if (r.get_bytes(4, "magic") != std::string_view(checkpoint_magic, 4))
            throw FormatError("'" + path + "' is not a parameter checkpoint (bad magic)");
        const auto version = r.get<std::uint32_t>("version");
        if (version != checkpoint_version)
            throw FormatError("unsupported checkpoint version " + std::to_string(version));
        const auto count = r.get<std::uint32_t>("tensor count");
        if (count != params.size())
            throw DimensionError("checkpoint holds " + std::to_string(count) + " tensors, model expects " + std::to_string(params.size()));
        for (auto *t : params)
        {
            const auto rank = r.get<std::uint32_t>("tensor rank");
            std::vector<std::size_t> shape(rank);
            for (auto &d : shape)
                d = static_cast<std::size_t>(r.get<std::uint64_t>("tensor dimension"));
            if (shape != t->shape)
                throw DimensionError("checkpoint tensor shape does not match the model");
        }
        for (auto *t : params)
            for (auto &v : t->value)
                v = r.get<double>("tensor values");
        if (r.remaining() != 0)
            throw DimensionError("checkpoint has trailing bytes");
    }
}
