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

#include "bmal/errors.hpp"
#include "bmal/nn.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace bmal;
using namespace bmal::nn;

namespace
{
    double weighted_output(const Mlp &m, std::span<const double> x, std::span<const double> c)
    {
        const auto y = m.forward(x);
        double s = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k)
            s += c[k] * y[k];
        return s;
    }

    std::string temp_path(const std::string &name)
    {
        return (std::filesystem::temp_directory_path() / ("bmal_nn_" + name)).string();
    }
}

TEST_CASE("zero network outputs zero")
{
    Mlp m({3, 5, 2});
    const auto y = m.forward(std::vector<double>{1.0, -2.0, 0.5});
    CHECK(y == std::vector<double>{0.0, 0.0});
}

TEST_CASE("single identity layer passes input through")
{
    Mlp m({3, 3});
    auto &w = m.layer(0).weight.value;
    w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const std::vector<double> x{0.3, -1.2, 4.0};
    CHECK(m.forward(x) == x);
}

TEST_CASE("hand-set 2-3-1 network")
{
    Mlp m({2, 3, 1});
    m.layer(0).weight.value = {1.0, 2.0, -1.0, 0.5, 0.0, -3.0};
    m.layer(0).bias.value = {0.1, -0.2, 0.3};
    m.layer(1).weight.value = {2.0, -1.0, 0.5};
    m.layer(1).bias.value = {0.25};
    // x = (1, 2): pre-activations 5.1, -0.2, -5.7; ReLU gives 5.1, 0, 0
    const auto y = m.forward(std::vector<double>{1.0, 2.0});
    CHECK(y[0] == doctest::Approx(2.0 * 5.1 + 0.25));
}

TEST_CASE("linear loss gradient equals the input")
{
    Mlp m({4, 1});
    const std::vector<double> x{0.5, -1.0, 2.0, 3.5};
    MlpTrace tr;
    m.forward(x, tr);
    zero_grads(m.parameters());
    const std::vector<double> dy{1.0};
    m.backward(tr, dy, {});
    CHECK(m.layer(0).weight.grad == x);
    CHECK(m.layer(0).bias.grad[0] == 1.0);
}

TEST_CASE("backward without a recorded trace is an error")
{
    Mlp m({2, 2});
    MlpTrace tr;
    const std::vector<double> dy{1.0, 1.0};
    CHECK_THROWS_AS(m.backward(tr, dy, {}), StateError);
}

TEST_CASE("MLP gradients match central differences")
{
    std::mt19937_64 rng(12);
    Mlp m({5, 7, 6, 3});
    m.init_glorot(rng);
    // Push biases away from zero so ReLU kinks are not hit
    std::normal_distribution<double> n(0.0, 0.3);
    for (auto *t : m.parameters())
        for (auto &v : t->value)
            v += n(rng);
    std::vector<double> x(5), c(3);
    for (auto &v : x)
        v = n(rng) * 3;
    for (auto &v : c)
        v = n(rng) * 3;

    MlpTrace tr;
    m.forward(x, tr);
    zero_grads(m.parameters());
    std::vector<double> dx(5);
    m.backward(tr, c, dx);

    const double h = 1e-5;
    int checked = 0;
    for (auto *t : m.parameters())
        for (std::size_t k = 0; k < t->size(); ++k)
        {
            const double keep = t->value[k];
            t->value[k] = keep + h;
            const double up = weighted_output(m, x, c);
            t->value[k] = keep - h;
            const double down = weighted_output(m, x, c);
            t->value[k] = keep;
            const double fd = (up - down) / (2 * h);
            CHECK(std::abs(fd - t->grad[k]) <= 1e-4 * std::max(1.0, std::abs(fd)));
            ++checked;
        }
    CHECK(checked >= 100);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (weighted_output(m, xp, c) - weighted_output(m, xm, c)) / (2 * h);
        CHECK(std::abs(fd - dx[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("repeated backward passes give identical gradients")
{
    std::mt19937_64 rng(2);
    Mlp m({3, 4, 2});
    m.init_glorot(rng);
    const std::vector<double> x{0.1, 0.2, -0.3}, dy{1.0, -2.0};
    MlpTrace tr;
    m.forward(x, tr);
    zero_grads(m.parameters());
    m.backward(tr, dy, {});
    const auto first = m.layer(0).weight.grad;
    zero_grads(m.parameters());
    m.backward(tr, dy, {});
    CHECK(m.layer(0).weight.grad == first);
}

TEST_CASE("glorot init is bounded, seeded and zero-bias")
{
    std::mt19937_64 a(5), b(5);
    Mlp m1({10, 20, 4}), m2({10, 20, 4});
    m1.init_glorot(a);
    m2.init_glorot(b);
    CHECK(m1.layer(0).weight.value == m2.layer(0).weight.value);
    const double limit = std::sqrt(6.0 / 30.0);
    for (double w : m1.layer(0).weight.value)
        CHECK(std::abs(w) <= limit);
    for (double v : m1.layer(1).bias.value)
        CHECK(v == 0.0);
}

TEST_CASE("softmax")
{
    auto p = softmax(std::vector<double>{0.0, std::log(3.0)});
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));

    p = softmax(std::vector<double>{2.0, 2.0, 2.0, 2.0, 2.0});
    for (double v : p)
        CHECK(v == doctest::Approx(0.2));

    const std::vector<double> x{1.0, -3.0, 0.5, 7.0};
    auto shifted = x;
    for (auto &v : shifted)
        v += 123.0;
    const auto a = softmax(x), b = softmax(shifted);
    for (std::size_t k = 0; k < x.size(); ++k)
        CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));

    const auto big = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("cross entropy")
{
    CHECK(cross_entropy(std::vector<double>{0.0, 1.0, 0.0}, 1) == doctest::Approx(0.0));
    CHECK(cross_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2) == doctest::Approx(std::log(4.0)));
    CHECK(cross_entropy(std::vector<double>{0.25, 0.75}, 1) == doctest::Approx(0.28768).epsilon(1e-5));
    CHECK(std::isfinite(cross_entropy(std::vector<double>{1.0, 0.0}, 1)));
    CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.5, 0.5}, 2), InvalidInput);
}

TEST_CASE("softmax cross-entropy gradient matches central differences")
{
    const std::vector<double> z{0.3, -1.1, 2.0, 0.7};
    std::vector<double> g(4);
    softmax_cross_entropy_grad(softmax(z), 2, g);
    for (std::size_t k = 0; k < z.size(); ++k)
    {
        auto zp = z, zm = z;
        zp[k] += 1e-5;
        zm[k] -= 1e-5;
        const double fd = (cross_entropy(softmax(zp), 2) - cross_entropy(softmax(zm), 2)) / 2e-5;
        CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("adam leaves parameters alone under zero gradient")
{
    Tensor t({3});
    t.value = {1.0, -2.0, 3.0};
    AdamState st;
    Tensor *ps[] = {&t};
    for (int k = 0; k < 5; ++k)
        adam_step(st, ps);
    CHECK(t.value == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("adam first step moves by the learning rate against the gradient sign")
{
    Tensor t({3});
    t.value = {0.0, 0.0, 0.0};
    t.grad = {0.5, -3.0, 1e-3};
    AdamState st;
    st.learning_rate = 0.01;
    Tensor *ps[] = {&t};
    adam_step(st, ps);
    // m_hat = g, v_hat = g^2 after bias correction
    for (std::size_t k = 0; k < 3; ++k)
    {
        const double g = t.grad[k];
        CHECK(t.value[k] == doctest::Approx(-0.01 * g / (std::abs(g) + 1e-8)).epsilon(1e-12));
    }
}

TEST_CASE("adam steps approach the learning rate under a constant gradient")
{
    Tensor t({1});
    AdamState st;
    st.learning_rate = 0.001;
    Tensor *ps[] = {&t};
    // Independent iteration of the update rule
    double m = 0, v = 0, x = 0;
    for (int k = 1; k <= 2000; ++k)
    {
        t.grad = {0.37};
        const double before = t.value[0];
        adam_step(st, ps);
        m = 0.9 * m + 0.1 * 0.37;
        v = 0.999 * v + 0.001 * 0.37 * 0.37;
        x -= 0.001 * (m / (1 - std::pow(0.9, k))) / (std::sqrt(v / (1 - std::pow(0.999, k))) + 1e-8);
        CHECK(t.value[0] == doctest::Approx(x).epsilon(1e-9));
        if (k > 1000)
            CHECK(std::abs(before - t.value[0]) == doctest::Approx(0.001).epsilon(1e-6));
    }
}

TEST_CASE("adam rejects a changed parameter layout")
{
    Tensor a({2}), b({3});
    AdamState st;
    Tensor *first[] = {&a};
    adam_step(st, first);
    Tensor *second[] = {&b};
    CHECK_THROWS(adam_step(st, second));
}

TEST_CASE("non-finite values are reported")
{
    CHECK_NOTHROW(check_finite(std::vector<double>{1.0, 2.0}, "ok"));
    CHECK_THROWS_AS(check_finite(std::vector<double>{1.0, NAN}, "x"), NumericError);
    CHECK_THROWS_AS(check_finite(std::vector<double>{INFINITY}, "x"), NumericError);
}

TEST_CASE("parameter files round trip and reject mismatches")
{
    std::mt19937_64 rng(1);
    Mlp m({3, 4, 2});
    m.init_glorot(rng);
    const auto path = temp_path("params.bin");
    const auto cp = std::as_const(m).parameters();
    save_parameters(path, cp);

    Mlp other({3, 4, 2});
    load_parameters(path, other.parameters());
    CHECK(other.layer(0).weight.value == m.layer(0).weight.value);
    CHECK(other.layer(1).bias.value == m.layer(1).bias.value);

    Mlp wrong({3, 5, 2});
    CHECK_THROWS_AS(load_parameters(path, wrong.parameters()), DimensionError);

    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << "nope";
    }
    CHECK_THROWS_AS(load_parameters(path, other.parameters()), DataError);
    std::filesystem::remove(path);
}
