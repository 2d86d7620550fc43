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
#include "bmal/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bmal;

namespace
{
    // Elementary rotations written out entry by entry
    Mat3 rot_z(double a)
    {
        Mat3 m;
        m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
        return m;
    }
    Mat3 rot_y(double b)
    {
        Mat3 m;
        m << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
        return m;
    }
    Mat3 rot_x(double g)
    {
        Mat3 m;
        m << 1, 0, 0, 0, std::cos(g), -std::sin(g), 0, std::sin(g), std::cos(g);
        return m;
    }
}

TEST_CASE("zero rotation is the identity")
{
    CHECK((rotation_matrix({0, 0, 0}) - Mat3::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("quarter turn about z maps x to y")
{
    const Vec3 v = rotation_matrix({pi / 2, 0, 0}) * Vec3(1, 0, 0);
    CHECK((v - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("rotation composes z, y, x elementary rotations")
{
    const Orientation o{pi / 3, pi / 8, -pi / 8};
    const Mat3 r = rotation_matrix(o);
    CHECK((r - rot_z(o.alpha) * rot_y(o.beta) * rot_x(o.gamma)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
}

TEST_CASE("random rotations are orthonormal with unit determinant")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-two_pi, two_pi);
    for (int k = 0; k < 1000; ++k)
    {
        const Mat3 r = rotation_matrix({u(rng), u(rng), u(rng)});
        CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("local angles of simple directions")
{
    auto a = global_to_local_angles(Vec3(1, 0, 0), {0, 0, 0});
    CHECK(a.phi == doctest::Approx(0.0));
    CHECK(a.theta == doctest::Approx(pi / 2));

    for (double alpha : {0.0, 0.7, 2.5, 5.9})
        CHECK(global_to_local_angles(Vec3(0, 0, 1), {alpha, 0, 0}).theta == doctest::Approx(0.0));

    a = global_to_local_angles(Vec3(0, 1, 0), {pi / 2, 0, 0});
    CHECK(std::min(a.phi, two_pi - a.phi) < 1e-12);
    CHECK(a.theta == doctest::Approx(pi / 2));
}

TEST_CASE("local angles match inverse rotation followed by spherical conversion")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int k = 0; k < 500; ++k)
    {
        const Vec3 d(n(rng), n(rng), n(rng));
        const Orientation o{u(rng), u(rng) / 4, u(rng) / 4};
        const Vec3 l = (rot_z(o.alpha) * rot_y(o.beta) * rot_x(o.gamma)).transpose() * d.normalized();
        double phi = std::atan2(l.y(), l.x());
        if (phi < 0)
            phi += two_pi;
        const double theta = std::acos(std::clamp(l.z(), -1.0, 1.0));
        const auto a = global_to_local_angles(d, o);
        CHECK(std::abs(std::remainder(a.phi - phi, two_pi)) < 1e-9);
        CHECK(a.theta == doctest::Approx(theta).epsilon(1e-12));
    }
}

TEST_CASE("angle round trip reproduces unit vectors")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int k = 0; k < 1000; ++k)
    {
        const Vec3 d = Vec3(n(rng), n(rng), n(rng)).normalized();
        const Orientation o{u(rng), u(rng), u(rng)};
        CHECK((local_angles_to_global(global_to_local_angles(d, o), o) - d).norm() < 1e-9);
    }
}

TEST_CASE("zero direction is rejected")
{
    CHECK_THROWS_AS(global_to_local_angles(Vec3::Zero(), {}), InvalidInput);
}

TEST_CASE("point region yields that location")
{
    Scene s = living_room_scene();
    s.rx_region = {Vec3(3, 0, 0), Vec3(3, 0, 0), "point"};
    const auto p = sample_rx_pose(s, 42);
    CHECK(p.position == Vec3(3, 0, 0));
}

TEST_CASE("pose sampling is deterministic per seed")
{
    const Scene s = living_room_scene(true);
    const auto a = sample_rx_pose(s, 77), b = sample_rx_pose(s, 77), c = sample_rx_pose(s, 78);
    CHECK(a.position == b.position);
    CHECK(a.orientation == b.orientation);
    CHECK(!(a.position == c.position));
}

TEST_CASE("planar service area draws stay in range and azimuth is uniform")
{
    const Scene s = living_room_scene();
    constexpr int draws = 10000, bins = 20;
    std::vector<int> hist(bins, 0);
    Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
    for (int i = 0; i < draws; ++i)
    {
        const auto p = sample_rx_pose(s, static_cast<std::uint64_t>(i) * 7919 + 1);
        lo = lo.cwiseMin(p.position);
        hi = hi.cwiseMax(p.position);
        REQUIRE(p.orientation.alpha >= 0.0);
        REQUIRE(p.orientation.alpha < two_pi);
        CHECK(p.orientation.beta == 0.0);
        CHECK(p.orientation.gamma == 0.0);
        ++hist[std::min(bins - 1, static_cast<int>(p.orientation.alpha / two_pi * bins))];
    }
    CHECK(lo.x() >= 1.5);
    CHECK(hi.x() <= 5.5);
    CHECK(lo.y() >= -3.5);
    CHECK(hi.y() <= 3.5);
    CHECK(lo.z() == 0.0);
    CHECK(hi.z() == 0.0);

    double chi2 = 0.0;
    const double expected = static_cast<double>(draws) / bins;
    for (int h : hist)
        chi2 += (h - expected) * (h - expected) / expected;
    // 99th percentile of chi-square with 19 degrees of freedom
    CHECK(chi2 < 36.191);
}

TEST_CASE("tilted service area draws stay inside their ranges")
{
    const Scene s = living_room_scene(true);
    for (int i = 0; i < 2000; ++i)
    {
        const auto p = sample_rx_pose(s, i);
        CHECK(s.rx_region.contains(p.position));
        CHECK(std::abs(p.orientation.beta) <= pi / 4);
        CHECK(std::abs(p.orientation.gamma) <= pi / 4);
    }
}

TEST_CASE("box blocks only segments that pass through it")
{
    const Box b{Vec3(1, -1, -1), Vec3(2, 1, 1), "b"};
    CHECK(b.blocks_segment(Vec3(0, 0, 0), Vec3(3, 0, 0)));
    CHECK_FALSE(b.blocks_segment(Vec3(0, 2, 0), Vec3(3, 2, 0)));
    CHECK_FALSE(b.blocks_segment(Vec3(0, 0, 0), Vec3(0.5, 0, 0)));
}

TEST_CASE("azimuth wrap lands in [0, 2pi)")
{
    CHECK(wrap_two_pi(-0.5) == doctest::Approx(two_pi - 0.5));
    CHECK(wrap_two_pi(two_pi) == doctest::Approx(0.0));
    CHECK(wrap_two_pi(7.0) == doctest::Approx(7.0 - two_pi));
}

TEST_CASE("default scene validates")
{
    CHECK_NOTHROW(living_room_scene().validate());
    CHECK_NOTHROW(living_room_scene(true).validate());
}
