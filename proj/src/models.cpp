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

#include "bmal/models.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bmal
{
    // ---------- inputs ----------

    Vec3 InputNormalizer::normalize(const Vec3 &p) const
    {
        Vec3 out;
        for (int k = 0; k < 3; ++k)
        {
            const double lo = region_.min[k], hi = region_.max[k];
            out[k] = hi > lo ? 2.0 * (p[k] - lo) / (hi - lo) - 1.0 : 0.0;
        }
        return out;
    }

    UeContext InputNormalizer::context(const Pose &pose) const
    {
        return {normalize(pose.position), pose.orientation};
    }

    int gnn_input_dim(InputMode mode) { return mode == InputMode::azimuth_only ? 6 : 11; }

    int dnn_input_dim(InputMode mode) { return mode == InputMode::azimuth_only ? 4 : 6; }

    std::vector<double> gnn_node_inputs(const UeContext &ctx, const Codebook &cb, InputMode mode)
    {
        const int d = gnn_input_dim(mode);
        std::vector<double> x(static_cast<std::size_t>(cb.size()) * d);
        const auto &o = ctx.orientation;
        for (int i = 0; i < cb.size(); ++i)
        {
            double *row = x.data() + static_cast<std::size_t>(i) * d;
            row[0] = ctx.location.x();
            row[1] = ctx.location.y();
            row[2] = ctx.location.z();
            row[3] = std::sin(o.alpha);
            row[4] = std::cos(o.alpha);
            if (mode == InputMode::azimuth_only)
            {
                row[5] = cb.beams[i].angles.phi / pi;
                continue;
            }
            row[5] = std::sin(o.beta);
            row[6] = std::cos(o.beta);
            row[7] = std::sin(o.gamma);
            row[8] = std::cos(o.gamma);
            row[9] = cb.beams[i].angles.phi / pi;
            row[10] = cb.beams[i].angles.theta / pi;
        }
        return x;
    }

    std::vector<double> dnn_inputs(const UeContext &ctx, InputMode mode)
    {
        std::vector<double> x = {ctx.location.x(), ctx.location.y(), ctx.location.z(), ctx.orientation.alpha / pi - 1.0};
        if (mode == InputMode::full_orientation)
        {
            x.push_back(ctx.orientation.beta / (pi / 4.0));
            x.push_back(ctx.orientation.gamma / (pi / 4.0));
        }
        return x;
    }

    // ---------- GNN ----------

    namespace
    {
        std::vector<int> mlp_sizes(int in, int hidden_layers, int hidden_units, int out)
        {
            std::vector<int> s{in};
            for (int l = 0; l < hidden_layers; ++l)
                s.push_back(hidden_units);
            s.push_back(out);
            return s;
        }
    }

    GnnModel::GnnModel(int input_dim, const GnnHyper &hyper, BeamGraph graph)
        : input_dim_(input_dim), hyper_(hyper), graph_(std::move(graph))
    {
        if (input_dim < 1 || hyper.feature_dim < 1 || hyper.message_dim < 1 || hyper.n_iter < 0 ||
            hyper.hidden_layers < 0 || hyper.hidden_units < 1)
            throw InvalidInput("GnnModel: invalid hyperparameters");
        const int f = hyper.feature_dim, m = hyper.message_dim;
        embed = nn::Mlp({input_dim, f});
        edge_mlp = nn::Mlp(mlp_sizes(2 * f, hyper.hidden_layers, hyper.hidden_units, m));
        node_mlp = nn::Mlp(mlp_sizes(f + m, hyper.hidden_layers, hyper.hidden_units, f));
        readout = nn::Mlp({f, 1});
    }

    void GnnModel::init_glorot(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        embed.init_glorot(rng);
        edge_mlp.init_glorot(rng);
        node_mlp.init_glorot(rng);
        readout.init_glorot(rng);
    }

    std::vector<nn::Tensor *> GnnModel::parameters()
    {
        std::vector<nn::Tensor *> p;
        for (auto *mlp : {&embed, &edge_mlp, &node_mlp, &readout})
            for (auto *t : mlp->parameters())
                p.push_back(t);
        return p;
    }

    std::vector<const nn::Tensor *> GnnModel::parameters() const
    {
        std::vector<const nn::Tensor *> p;
        for (const auto *mlp : {&embed, &edge_mlp, &node_mlp, &readout})
            for (const auto *t : mlp->parameters())
                p.push_back(t);
        return p;
    }

    void GnnModel::run(std::span<const double> node_inputs, GnnTape *tape, std::vector<double> &logits) const
    {
        const int n = node_count();
        const int f = hyper_.feature_dim, m = hyper_.message_dim;
        if (node_inputs.size() != static_cast<std::size_t>(n) * input_dim_)
            throw InvalidInput("GnnModel: expected " + std::to_string(n) + " x " + std::to_string(input_dim_) + " node inputs");

        auto row = [](std::vector<double> &v, int i, int w)
        { return std::span<double>(v.data() + static_cast<std::size_t>(i) * w, w); };
        auto input_row = [&](int i)
        { return node_inputs.subspan(static_cast<std::size_t>(i) * input_dim_, input_dim_); };

        std::vector<double> h(static_cast<std::size_t>(n) * f);
        if (tape)
            tape->embed.resize(n);
        for (int i = 0; i < n; ++i)
        {
            if (tape)
            {
                embed.forward(input_row(i), tape->embed[i]);
                std::copy(tape->embed[i].output.begin(), tape->embed[i].output.end(), row(h, i, f).begin());
            }
            else
                embed.forward(input_row(i), row(h, i, f));
        }

        if (tape)
        {
            tape->features.resize(hyper_.n_iter);
            tape->edge.resize(hyper_.n_iter);
            tape->aggregate.resize(hyper_.n_iter);
            tape->node.resize(hyper_.n_iter);
        }

        std::vector<double> pair(2 * f), msg(m), agg(static_cast<std::size_t>(n) * m), cat(f + m);
        std::vector<double> h_next(h.size());
        for (int t = 0; t < hyper_.n_iter; ++t)
        {
            std::fill(agg.begin(), agg.end(), 0.0);
            if (tape)
            {
                tape->features[t] = h;
                tape->edge[t].resize(static_cast<std::size_t>(n) * graph_.in_degree());
                tape->node[t].resize(n);
            }
            // Edge messages from the features entering this round
            for (int i = 0; i < n; ++i)
            {
                const auto &src = graph_.in_neighbors(i);
                auto hi = row(h, i, f);
                auto ai = row(agg, i, m);
                for (std::size_t e = 0; e < src.size(); ++e)
                {
                    auto hj = row(h, src[e], f);
                    std::copy(hj.begin(), hj.end(), pair.begin());
                    std::copy(hi.begin(), hi.end(), pair.begin() + f);
                    if (tape)
                    {
                        auto &tr = tape->edge[t][static_cast<std::size_t>(i) * graph_.in_degree() + e];
                        edge_mlp.forward(pair, tr);
                        for (int c = 0; c < m; ++c)
                            ai[c] += tr.output[c];
                    }
                    else
                    {
                        edge_mlp.forward(pair, msg);
                        for (int c = 0; c < m; ++c)
                            ai[c] += msg[c];
                    }
                }
            }
            if (tape)
                tape->aggregate[t] = agg;
            for (int i = 0; i < n; ++i)
            {
                auto hi = row(h, i, f);
                auto ai = row(agg, i, m);
                std::copy(hi.begin(), hi.end(), cat.begin());
                std::copy(ai.begin(), ai.end(), cat.begin() + f);
                if (tape)
                {
                    auto &tr = tape->node[t][i];
                    node_mlp.forward(cat, tr);
                    std::copy(tr.output.begin(), tr.output.end(), row(h_next, i, f).begin());
                }
                else
                    node_mlp.forward(cat, row(h_next, i, f));
            }
            h.swap(h_next);
        }

        logits.assign(n, 0.0);
        if (tape)
        {
            tape->final_features = h;
            tape->readout.resize(n);
        }
        for (int i = 0; i < n; ++i)
        {
            if (tape)
            {
                readout.forward(row(h, i, f), tape->readout[i]);
                logits[i] = tape->readout[i].output[0];
            }
            else
                readout.forward(row(h, i, f), std::span<double>(&logits[i], 1));
        }
    }

    std::vector<double> GnnModel::logits(std::span<const double> node_inputs) const
    {
        std::vector<double> z;
        run(node_inputs, nullptr, z);
        return z;
    }

    std::vector<double> GnnModel::forward(std::span<const double> node_inputs) const
    {
        auto z = logits(node_inputs);
        nn::check_finite(z, "GNN logits");
        return nn::softmax(z);
    }

    double GnnModel::forward_loss(std::span<const double> node_inputs, int label, GnnTape &tape) const
    {
        std::vector<double> z;
        tape.recorded = false;
        run(node_inputs, &tape, z);
        nn::check_finite(z, "GNN logits");
        tape.probs = nn::softmax(z);
        tape.label = label;
        const double loss = nn::cross_entropy(tape.probs, label);
        tape.recorded = true;
        return loss;
    }

    void GnnModel::backward(GnnTape &tape)
    {
        if (!tape.recorded)
            throw StateError("GnnModel::backward called before forward_loss");
        const int n = node_count();
        const int f = hyper_.feature_dim, m = hyper_.message_dim;
        const int k = graph_.in_degree();

        std::vector<double> dlogits(n, 0.0);
        nn::softmax_cross_entropy_grad(tape.probs, tape.label, dlogits);

        std::vector<double> dh(static_cast<std::size_t>(n) * f, 0.0);
        auto row = [](std::vector<double> &v, int i, int w)
        { return std::span<double>(v.data() + static_cast<std::size_t>(i) * w, w); };

        for (int i = 0; i < n; ++i)
            readout.backward(tape.readout[i], std::span<const double>(&dlogits[i], 1), row(dh, i, f));

        std::vector<double> dprev(dh.size()), dagg(static_cast<std::size_t>(n) * m), dcat(f + m), dpair(2 * f);
        for (int t = hyper_.n_iter - 1; t >= 0; --t)
        {
            std::fill(dprev.begin(), dprev.end(), 0.0);
            for (int i = 0; i < n; ++i)
            {
                node_mlp.backward(tape.node[t][i], row(dh, i, f), dcat);
                auto dpi = row(dprev, i, f);
                for (int c = 0; c < f; ++c)
                    dpi[c] += dcat[c];
                std::copy(dcat.begin() + f, dcat.end(), row(dagg, i, m).begin());
            }
            for (int i = 0; i < n; ++i)
            {
                const auto &src = graph_.in_neighbors(i);
                for (std::size_t e = 0; e < src.size(); ++e)
                {
                    edge_mlp.backward(tape.edge[t][static_cast<std::size_t>(i) * k + e], row(dagg, i, m), dpair);
                    auto dpj = row(dprev, src[e], f);
                    auto dpi = row(dprev, i, f);
                    for (int c = 0; c < f; ++c)
                    {
                        dpj[c] += dpair[c];
                        dpi[c] += dpair[f + c];
                    }
                }
            }
            dh.swap(dprev);
        }

        for (int i = 0; i < n; ++i)
            embed.backward(tape.embed[i], row(dh, i, f), {});
        tape.recorded = false;
    }

    std::vector<double> gnn_forward(const GnnModel &model, const UeContext &ctx, const Codebook &cb, InputMode mode)
    {
        if (cb.size() != model.node_count())
            throw InvalidInput("gnn_forward: codebook size differs from the model graph");
        return model.forward(gnn_node_inputs(ctx, cb, mode));
    }

    // ---------- candidate selection ----------

    Eigen::MatrixXd pair_probabilities(std::span<const double> p_tx, std::span<const double> p_rx)
    {
        Eigen::MatrixXd out(p_tx.size(), p_rx.size());
        for (std::size_t p = 0; p < p_tx.size(); ++p)
            for (std::size_t q = 0; q < p_rx.size(); ++q)
                out(p, q) = p_tx[p] * p_rx[q];
        return out;
    }

    std::vector<BeamPair> top_nb_candidates(const Eigen::MatrixXd &pair_probs, int n_b)
    {
        const int n_r = static_cast<int>(pair_probs.cols());
        const int total = static_cast<int>(pair_probs.size());
        if (n_b < 1 || n_b > total)
            throw InvalidInput("top_nb_candidates: n_b must lie in [1, " + std::to_string(total) + "]");
        auto prob = [&](int flat)
        { return pair_probs(flat / n_r, flat % n_r); };
        std::vector<int> idx(total);
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + n_b, idx.end(), [&](int a, int b)
                          {
                              const double pa = prob(a), pb = prob(b);
                              return pa != pb ? pa > pb : a < b; });
        std::vector<BeamPair> out;
        out.reserve(n_b);
        for (int i = 0; i < n_b; ++i)
            out.push_back({idx[i] / n_r, idx[i] % n_r});
        return out;
    }

    // ---------- trainable models ----------

    std::size_t BeamModel::parameter_count() const
    {
        std::size_t n = 0;
        for (const auto *t : parameters())
            n += t->size();
        return n;
    }

    GnnPairModel::GnnPairModel(const Codebook &tx_cb, const Codebook &rx_cb, InputMode mode, const GnnHyper &hyper)
        : tx(gnn_input_dim(mode), hyper, build_graph(tx_cb, hyper.in_degree)),
          rx(gnn_input_dim(mode), hyper, build_graph(rx_cb, hyper.in_degree)),
          tx_cb_(tx_cb), rx_cb_(rx_cb), mode_(mode)
    {
    }

    void GnnPairModel::init_glorot(std::uint64_t seed)
    {
        tx.init_glorot(io::mix_seed(seed, 0));
        rx.init_glorot(io::mix_seed(seed, 1));
    }

    std::vector<double> GnnPairModel::tx_probabilities(const UeContext &ctx) const
    {
        return tx.forward(gnn_node_inputs(ctx, tx_cb_, mode_));
    }

    std::vector<double> GnnPairModel::rx_probabilities(const UeContext &ctx) const
    {
        return rx.forward(gnn_node_inputs(ctx, rx_cb_, mode_));
    }

    Eigen::MatrixXd GnnPairModel::predict(const UeContext &ctx) const
    {
        return pair_probabilities(tx_probabilities(ctx), rx_probabilities(ctx));
    }

    double GnnPairModel::loss(const UeContext &ctx, BeamPair label) const
    {
        return nn::cross_entropy(tx_probabilities(ctx), label.tx) + nn::cross_entropy(rx_probabilities(ctx), label.rx);
    }

    double GnnPairModel::accumulate_gradients(const UeContext &ctx, BeamPair label)
    {
        const double l = tx.forward_loss(gnn_node_inputs(ctx, tx_cb_, mode_), label.tx, tx_tape_) +
                         rx.forward_loss(gnn_node_inputs(ctx, rx_cb_, mode_), label.rx, rx_tape_);
        tx.backward(tx_tape_);
        rx.backward(rx_tape_);
        return l;
    }

    std::vector<nn::Tensor *> GnnPairModel::parameters()
    {
        auto p = tx.parameters();
        for (auto *t : rx.parameters())
            p.push_back(t);
        return p;
    }

    std::vector<const nn::Tensor *> GnnPairModel::parameters() const
    {
        auto p = tx.parameters();
        for (const auto *t : rx.parameters())
            p.push_back(t);
        return p;
    }

    DnnModel::DnnModel(int n_tx, int n_rx, InputMode mode, const DnnHyper &hyper)
        : mlp(mlp_sizes(dnn_input_dim(mode), hyper.hidden_layers, hyper.hidden_units, n_tx * n_rx)),
          n_tx_(n_tx), n_rx_(n_rx), mode_(mode)
    {
    }

    void DnnModel::init_glorot(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        mlp.init_glorot(rng);
    }

    std::vector<double> DnnModel::forward(const UeContext &ctx) const
    {
        auto z = mlp.forward(dnn_inputs(ctx, mode_));
        nn::check_finite(z, "DNN logits");
        return nn::softmax(z);
    }

    Eigen::MatrixXd DnnModel::predict(const UeContext &ctx) const
    {
        const auto p = forward(ctx);
        Eigen::MatrixXd out(n_tx_, n_rx_);
        for (int i = 0; i < n_tx_; ++i)
            for (int j = 0; j < n_rx_; ++j)
                out(i, j) = p[static_cast<std::size_t>(i) * n_rx_ + j];
        return out;
    }

    double DnnModel::loss(const UeContext &ctx, BeamPair label) const
    {
        return nn::cross_entropy(forward(ctx), label.tx * n_rx_ + label.rx);
    }

    double DnnModel::accumulate_gradients(const UeContext &ctx, BeamPair label)
    {
        mlp.forward(dnn_inputs(ctx, mode_), trace_);
        nn::check_finite(trace_.output, "DNN logits");
        const auto probs = nn::softmax(trace_.output);
        const int flat = label.tx * n_rx_ + label.rx;
        const double l = nn::cross_entropy(probs, flat);
        std::vector<double> dz(probs.size(), 0.0);
        nn::softmax_cross_entropy_grad(probs, flat, dz);
        mlp.backward(trace_, dz, {});
        trace_.recorded = false;
        return l;
    }

    // ---------- complexity ----------

    std::int64_t count_gnn_multiplications(std::int64_t n_t, std::int64_t n_r, std::int64_t f_n, std::int64_t f_m,
                                           std::int64_t n_iter, std::int64_t n_lg, std::int64_t n_hg)
    {
        return (n_t + n_r) * (6 * f_n + n_iter * (6 * f_n * n_hg + 3 * (n_lg - 1) * n_hg * n_hg + 3 * f_m * n_hg));
    }

    std::int64_t count_dnn_multiplications(std::int64_t n_t, std::int64_t n_r, std::int64_t n_ld, std::int64_t n_hd)
    {
        return 4 * n_hd + (n_ld - 1) * n_hd * n_hd + n_hd * n_t * n_r;
    }

    std::int64_t count_gnn_parameters(std::int64_t f_n, std::int64_t f_m, std::int64_t n_lg, std::int64_t n_hg)
    {
        return 2 * (6 * f_n + 4 * f_n * n_hg + 2 * (n_lg - 1) * n_hg * n_hg + 2 * f_m * n_hg);
    }

    std::int64_t count_dnn_parameters(std::int64_t n_t, std::int64_t n_r, std::int64_t n_ld, std::int64_t n_hd)
    {
        return count_dnn_multiplications(n_t, n_r, n_ld, n_hd);
    }
}
