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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace bmal;

namespace
{
    double delta_oracle(const Angles &a, const Angles &b)
    {
        const Vec3 u(std::sin(a.theta) * std::cos(a.phi), std::sin(a.theta) * std::sin(a.phi), std::cos(a.theta));
        const Vec3 v(std::sin(b.theta) * std::cos(b.phi), std::sin(b.theta) * std::sin(b.phi), std::cos(b.theta));
        return u.dot(v);
    }

    // Two largest correlations by full scan, lower index on ties, ascending
    std::vector<int> brute_neighbors(const Codebook &cb, int i)
    {
        int best1 = -1, best2 = -1;
        auto better = [&](int a, int b)
        {
            if (b < 0)
                return true;
            const double da = delta_oracle(cb.beams[i].angles, cb.beams[a].angles);
            const double db = delta_oracle(cb.beams[i].angles, cb.beams[b].angles);
            return da > db || (da == db && a < b);
        };
        for (int j = 0; j < cb.size(); ++j)
        {
            if (j == i)
                continue;
            if (better(j, best1))
            {
                best2 = best1;
                best1 = j;
            }
            else if (better(j, best2))
                best2 = j;
        }
        std::vector<int> out{best1, best2};
        std::sort(out.begin(), out.end());
        return out;
    }
}

TEST_CASE("angular correlation special cases")
{
    CHECK(angular_correlation({0.3, 1.1}, {0.3, 1.1}) == doctest::Approx(1.0));
    CHECK(angular_correlation({0.3, pi / 2}, {1.4, pi / 2}) == doctest::Approx(std::cos(0.3 - 1.4)));
    CHECK(angular_correlation({0.0, pi / 2}, {0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("angular correlation is bounded and symmetric")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> phi(0, two_pi), theta(0, pi);
    for (int k = 0; k < 20000; ++k)
    {
        const Angles a{phi(rng), theta(rng)}, b{phi(rng), theta(rng)};
        const double d = angular_correlation(a, b);
        CHECK(d >= -1.0);
        CHECK(d <= 1.0);
        CHECK(d == angular_correlation(b, a));
        CHECK(d == doctest::Approx(delta_oracle(a, b)));
    }
}

TEST_CASE("four-beam ULA graph")
{
    const auto g = build_graph(dft_codebook(ArrayGeometry::ula(4)));
    CHECK(g.in_neighbors(0) == std::vector<int>{1, 2});
    CHECK(g.in_neighbors(1) == std::vector<int>{0, 2});
    CHECK(g.in_neighbors(2) == std::vector<int>{1, 3});
    CHECK(g.in_neighbors(3) == std::vector<int>{1, 2});
    CHECK(g.edges().size() == 8);
}

TEST_CASE("ULA graphs match brute force and interior nodes link to adjacent beams")
{
    for (int n = 3; n <= 64; ++n)
    {
        const auto cb = dft_codebook(ArrayGeometry::ula(n));
        const auto g = build_graph(cb);
        CHECK(g.edges().size() == static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i)
        {
            CHECK(g.in_neighbors(i) == brute_neighbors(cb, i));
            if (i > 0 && i < n - 1)
                CHECK(g.in_neighbors(i) == std::vector<int>{i - 1, i + 1});
        }
        // Adjacent beams are linked in at least one direction
        for (int i = 0; i + 1 < n; ++i)
        {
            const auto &a = g.in_neighbors(i), &b = g.in_neighbors(i + 1);
            CHECK((std::count(a.begin(), a.end(), i + 1) + std::count(b.begin(), b.end(), i)) > 0);
        }
    }
}

TEST_CASE("planar 4x4 graph matches brute force")
{
    const auto cb = dft_codebook(ArrayGeometry::upa(4, 4));
    const auto g = build_graph(cb);
    for (int i = 0; i < 16; ++i)
        CHECK(g.in_neighbors(i) == brute_neighbors(cb, i));
}

TEST_CASE("graph is deterministic and exports an edge list")
{
    const auto cb = dft_codebook(ArrayGeometry::ula(6));
    const auto a = build_graph(cb), b = build_graph(cb);
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("src,dst,delta\n", 0) == 0);
    const auto text = sa.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 13);
    for (const auto &e : a.edges())
        CHECK(e.delta == doctest::Approx(delta_oracle(cb.beams[e.src].angles, cb.beams[e.dst].angles)));
}

TEST_CASE("graph input checks")
{
    CHECK_THROWS_AS(build_graph(dft_codebook(ArrayGeometry::ula(2))), InvalidInput);
    const auto g = build_graph(dft_codebook(ArrayGeometry::ula(5)));
    CHECK_THROWS_AS(g.in_neighbors(5), InvalidInput);
    CHECK(build_graph(dft_codebook(ArrayGeometry::ula(5)), 3).in_neighbors(2).size() == 3);
}
