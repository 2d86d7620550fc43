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

#include "bmal/beam_graph.hpp"
#include "bmal/codebook.hpp"
#include "bmal/errors.hpp"
#include "bmal/models.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>

using namespace bmal;

namespace
{
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    // Dense layer i of an MLP as matrix and vector
    MatrixXd weight_of(const nn::Mlp &m, std::size_t i)
    {
        const auto &l = m.layer(i);
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(l.weight.value.data(), l.out(), l.in());
    }
    VectorXd bias_of(const nn::Mlp &m, std::size_t i)
    {
        const auto &l = m.layer(i);
        return Eigen::Map<const VectorXd>(l.bias.value.data(), l.out());
    }
    VectorXd mlp_eval(const nn::Mlp &m, VectorXd x)
    {
        for (std::size_t i = 0; i < m.layer_count(); ++i)
        {
            x = weight_of(m, i) * x + bias_of(m, i);
            if (i + 1 < m.layer_count())
                x = x.cwiseMax(0.0);
        }
        return x;
    }

    // Message passing written directly from its definition
    std::vector<double> gnn_oracle(const GnnModel &g, const std::vector<double> &inputs)
    {
        const int n = g.node_count(), d = g.input_dim(), f = g.hyper().feature_dim, m = g.hyper().message_dim;
        std::vector<VectorXd> h(n);
        for (int i = 0; i < n; ++i)
            h[i] = mlp_eval(g.embed, Eigen::Map<const VectorXd>(inputs.data() + i * d, d));
        for (int t = 0; t < g.hyper().n_iter; ++t)
        {
            std::vector<VectorXd> next(n);
            for (int i = 0; i < n; ++i)
            {
                VectorXd agg = VectorXd::Zero(m);
                for (int j : g.graph().in_neighbors(i))
                {
                    VectorXd pair(2 * f);
                    pair << h[j], h[i];
                    agg += mlp_eval(g.edge_mlp, pair);
                }
                VectorXd cat(f + m);
                cat << h[i], agg;
                next[i] = mlp_eval(g.node_mlp, cat);
            }
            h = next;
        }
        VectorXd z(n);
        for (int i = 0; i < n; ++i)
            z(i) = mlp_eval(g.readout, h[i])(0);
        const VectorXd e = (z.array() - z.maxCoeff()).exp();
        const VectorXd p = e / e.sum();
        return {p.data(), p.data() + n};
    }

    UeContext random_context(std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0), a(0.0, two_pi);
        UeContext c;
        c.location = Vec3(u(rng), u(rng), u(rng));
        c.orientation = {a(rng), u(rng) * 0.7, u(rng) * 0.7};
        return c;
    }

    // Relative error check of analytic against central-difference gradients
    template <typename LossFn>
    int gradient_check(std::vector<nn::Tensor *> params, LossFn &&loss, int coords, std::uint64_t seed, double &worst)
    {
        std::mt19937_64 rng(seed);
        std::size_t total = 0;
        for (auto *t : params)
            total += t->size();
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        int checked = 0;
        worst = 0.0;
        for (int k = 0; k < coords; ++k)
        {
            std::size_t idx = pick(rng);
            nn::Tensor *t = nullptr;
            for (auto *p : params)
            {
                if (idx < p->size())
                {
                    t = p;
                    break;
                }
                idx -= p->size();
            }
            const double keep = t->value[idx];
            t->value[idx] = keep + 1e-5;
            const double up = loss();
            t->value[idx] = keep - 1e-5;
            const double down = loss();
            t->value[idx] = keep;
            const double fd = (up - down) / 2e-5;
            const double err = std::abs(fd - t->grad[idx]) / std::max(1e-6, std::abs(fd) + std::abs(t->grad[idx]));
            worst = std::max(worst, err);
            ++checked;
        }
        return checked;
    }
}

TEST_CASE("input layouts")
{
    CHECK(gnn_input_dim(InputMode::azimuth_only) == 6);
    CHECK(dnn_input_dim(InputMode::azimuth_only) == 4);
    UeContext c;
    c.location = Vec3(0.1, -0.2, 0.0);
    c.orientation = {pi / 2, 0, 0};
    const auto cb = dft_codebook(ArrayGeometry::ula(4));
    const auto x = gnn_node_inputs(c, cb, InputMode::azimuth_only);
    REQUIRE(x.size() == 24);
    CHECK(x[3] == doctest::Approx(1.0));
    CHECK(x[4] == doctest::Approx(0.0));
    CHECK(x[6 + 5] == doctest::Approx(cb.beams[1].angles.phi / pi));
    CHECK(dnn_inputs(c, InputMode::azimuth_only).size() == 4);
    CHECK(dnn_inputs(c, InputMode::full_orientation).size() == 6);
}

TEST_CASE("normalizer maps the service area to [-1, 1]")
{
    const InputNormalizer n(Box{Vec3(1.5, -3.5, 0.0), Vec3(5.5, 3.5, 0.0), "r"});
    CHECK((n.normalize(Vec3(1.5, -3.5, 0.0)) - Vec3(-1, -1, 0)).norm() < 1e-15);
    CHECK((n.normalize(Vec3(5.5, 3.5, 0.0)) - Vec3(1, 1, 0)).norm() < 1e-15);
    CHECK((n.normalize(Vec3(3.5, 0.0, 0.0)) - Vec3(0, 0, 0)).norm() < 1e-15);
}

TEST_CASE("GNN output is a distribution and zero weights give uniform")
{
    const auto cb = dft_codebook(ArrayGeometry::ula(8));
    GnnModel g(6, GnnHyper{}, build_graph(cb));
    std::mt19937_64 rng(3);
    const auto ctx = random_context(rng);
    auto p = gnn_forward(g, ctx, cb, InputMode::azimuth_only);
    for (double v : p)
        CHECK(v == doctest::Approx(1.0 / 8));

    g.init_glorot(4);
    p = gnn_forward(g, ctx, cb, InputMode::azimuth_only);
    REQUIRE(p.size() == 8);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : p)
        CHECK(v > 0.0);
}

TEST_CASE("hand-set four-beam GNN matches direct message passing")
{
    const auto cb = dft_codebook(ArrayGeometry::ula(4));
    GnnHyper hy;
    hy.feature_dim = 2;
    hy.message_dim = 2;
    hy.hidden_units = 2;
    hy.hidden_layers = 1;
    GnnModel g(6, hy, build_graph(cb));
    // Small deterministic weights, alternating signs
    int k = 0;
    for (auto *t : g.parameters())
        for (auto &v : t->value)
        {
            v = 0.1 * ((k % 7) - 3) + 0.05 * (k % 2);
            ++k;
        }
    UeContext c;
    c.location = Vec3(0.2, -0.4, 0.0);
    c.orientation = {1.0, 0, 0};
    const auto x = gnn_node_inputs(c, cb, InputMode::azimuth_only);
    const auto p = g.forward(x), q = gnn_oracle(g, x);
    for (int i = 0; i < 4; ++i)
        CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-14));
}

TEST_CASE("random GNNs match direct message passing for several rounds")
{
    const auto cb = dft_codebook(ArrayGeometry::upa(3, 3));
    GnnHyper hy;
    hy.n_iter = 3;
    hy.hidden_layers = 2;
    GnnModel g(11, hy, build_graph(cb));
    g.init_glorot(17);
    std::mt19937_64 rng(1);
    for (int r = 0; r < 5; ++r)
    {
        const auto x = gnn_node_inputs(random_context(rng), cb, InputMode::full_orientation);
        const auto p = g.forward(x), q = gnn_oracle(g, x);
        for (int i = 0; i < 9; ++i)
            CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
    }
}

TEST_CASE("GNN is equivariant to relabeling the beams")
{
    const auto cb = dft_codebook(ArrayGeometry::ula(8));
    Codebook rev = cb;
    std::reverse(rev.beams.begin(), rev.beams.end());
    GnnModel a(6, GnnHyper{}, build_graph(cb));
    a.init_glorot(9);
    GnnModel b(6, GnnHyper{}, build_graph(rev));
    auto pa = a.parameters();
    auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
        pb[i]->value = pa[i]->value;
    std::mt19937_64 rng(2);
    const auto ctx = random_context(rng);
    const auto p = gnn_forward(a, ctx, cb, InputMode::azimuth_only);
    const auto q = gnn_forward(b, ctx, rev, InputMode::azimuth_only);
    for (int i = 0; i < 8; ++i)
        CHECK(p[i] == doctest::Approx(q[7 - i]).epsilon(1e-12));
}

TEST_CASE("without message passing identical node features score identically")
{
    const auto cb = dft_codebook(ArrayGeometry::ula(6));
    GnnHyper hy;
    hy.n_iter = 0;
    GnnModel g(6, hy, build_graph(cb));
    g.init_glorot(1);
    std::vector<double> x(36);
    for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 6; ++c)
            x[i * 6 + c] = 0.1 * c - 0.2;
    for (double v : g.forward(x))
        CHECK(v == doctest::Approx(1.0 / 6));
}

TEST_CASE("pair probabilities")
{
    auto m = pair_probabilities(std::vector<double>{0.25, 0.75}, std::vector<double>{0.5, 0.5});
    CHECK(m(0, 0) == doctest::Approx(0.125));
    CHECK(m(0, 1) == doctest::Approx(0.125));
    CHECK(m(1, 0) == doctest::Approx(0.375));
    CHECK(m(1, 1) == doctest::Approx(0.375));

    m = pair_probabilities(std::vector<double>{0, 1, 0}, std::vector<double>{1, 0});
    CHECK(m.sum() == 1.0);
    CHECK(m(1, 0) == 1.0);

    m = pair_probabilities(std::vector<double>(4, 0.25), std::vector<double>(2, 0.5));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(m(i, j) == doctest::Approx(1.0 / 8));
}

TEST_CASE("top candidates")
{
    Eigen::MatrixXd m(2, 2);
    m << 0.4, 0.3, 0.2, 0.1;
    auto s = top_nb_candidates(m, 2);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == BeamPair{0, 0});
    CHECK(s[1] == BeamPair{0, 1});

    s = top_nb_candidates(m, 4);
    CHECK(s.size() == 4);

    Eigen::MatrixXd one = Eigen::MatrixXd::Zero(3, 2);
    one(2, 1) = 1.0;
    s = top_nb_candidates(one, 1);
    CHECK(s[0] == BeamPair{2, 1});

    // Ties go to the lower flat index
    s = top_nb_candidates(Eigen::MatrixXd::Constant(2, 3, 0.5), 3);
    CHECK(s[0] == BeamPair{0, 0});
    CHECK(s[1] == BeamPair{0, 1});
    CHECK(s[2] == BeamPair{0, 2});

    CHECK_THROWS_AS(top_nb_candidates(m, 0), InvalidInput);
    CHECK_THROWS_AS(top_nb_candidates(m, 5), InvalidInput);
}

TEST_CASE("top-1 of an outer product factorizes")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int r = 0; r < 50; ++r)
    {
        std::vector<double> a(7), b(5);
        for (auto &v : a)
            v = u(rng);
        for (auto &v : b)
            v = u(rng);
        const auto top = top_nb_candidates(pair_probabilities(a, b), 1)[0];
        CHECK(top.tx == std::max_element(a.begin(), a.end()) - a.begin());
        CHECK(top.rx == std::max_element(b.begin(), b.end()) - b.begin());
    }
}

TEST_CASE("DNN output")
{
    DnnModel d(4, 3, InputMode::azimuth_only, DnnHyper{2, 16});
    std::mt19937_64 rng(8);
    const auto ctx = random_context(rng);
    for (double v : d.forward(ctx))
        CHECK(v == doctest::Approx(1.0 / 12));
    d.init_glorot(3);
    const auto p = d.forward(ctx);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = d.predict(ctx);
    CHECK(m.rows() == 4);
    CHECK(m.cols() == 3);
    CHECK(m(2, 1) == p[2 * 3 + 1]);
}

TEST_CASE("GNN pair model gradients match central differences")
{
    GnnPairModel g(dft_codebook(ArrayGeometry::ula(8)), dft_codebook(ArrayGeometry::ula(4)), InputMode::azimuth_only, GnnHyper{});
    g.init_glorot(21);
    std::mt19937_64 rng(5);
    const auto ctx = random_context(rng);
    const BeamPair label{5, 2};
    nn::zero_grads(g.parameters());
    g.accumulate_gradients(ctx, label);
    double worst = 0.0;
    const int n = gradient_check(g.parameters(), [&]
                                 { return g.loss(ctx, label); }, 150, 99, worst);
    CHECK(n >= 100);
    CHECK(worst < 1e-4);
}

TEST_CASE("DNN gradients match central differences")
{
    DnnModel d(8, 4, InputMode::full_orientation, DnnHyper{3, 24});
    d.init_glorot(2);
    std::mt19937_64 rng(7);
    const auto ctx = random_context(rng);
    const BeamPair label{3, 1};
    nn::zero_grads(d.parameters());
    d.accumulate_gradients(ctx, label);
    double worst = 0.0;
    const int n = gradient_check(d.parameters(), [&]
                                 { return d.loss(ctx, label); }, 150, 98, worst);
    CHECK(n >= 100);
    CHECK(worst < 1e-4);
}

TEST_CASE("complexity formulas")
{
    CHECK(count_gnn_multiplications(64, 16, 16, 16, 1, 1, 32) == 376320);
    CHECK(count_dnn_multiplications(64, 16, 3, 256) == 394240);
    CHECK(count_gnn_parameters(16, 16, 1, 32) == 6336);
    CHECK(count_dnn_parameters(64, 16, 3, 256) == 4 * 256 + 2 * 256 * 256 + 256 * 1024);
    CHECK(count_gnn_multiplications(4, 2, 2, 2, 1, 1, 2) == 288);
    for (int f : {2, 8, 16})
        CHECK(count_gnn_multiplications(64, 16, f, 16, 0, 1, 32) == (64 + 16) * 6 * f);
}

TEST_CASE("introspective parameter counts include biases and readout")
{
    GnnPairModel g(dft_codebook(ArrayGeometry::ula(64)), dft_codebook(ArrayGeometry::ula(16)), InputMode::azimuth_only, GnnHyper{});
    const std::size_t per_net = (6 * 16 + 16) + (32 * 32 + 32) + (32 * 16 + 16) + (32 * 32 + 32) + (32 * 16 + 16) + (16 + 1);
    CHECK(g.parameter_count() == 2 * per_net);
    DnnModel d(64, 16, InputMode::azimuth_only, DnnHyper{});
    CHECK(d.parameter_count() == static_cast<std::size_t>(394240 + 256 * 3 + 1024));
}

TEST_CASE("cloned models are independent")
{
    GnnPairModel g(dft_codebook(ArrayGeometry::ula(4)), dft_codebook(ArrayGeometry::ula(4)), InputMode::azimuth_only, GnnHyper{});
    g.init_glorot(1);
    auto c = g.clone();
    c->parameters()[0]->value[0] += 1.0;
    CHECK(c->parameters()[0]->value[0] != g.parameters()[0]->value[0]);
}
