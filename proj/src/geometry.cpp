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

#include "bmal/geometry.hpp"
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bmal
{
    bool Box::contains(const Vec3 &p, double tol) const
    {
        for (int k = 0; k < 3; ++k)
            if (p[k] < min[k] - tol || p[k] > max[k] + tol)
                return false;
        return true;
    }

    bool Box::contains(const Box &other) const
    {
        return contains(other.min) && contains(other.max);
    }

    bool Box::strictly_contains(const Vec3 &p) const
    {
        for (int k = 0; k < 3; ++k)
            if (p[k] <= min[k] || p[k] >= max[k])
                return false;
        return true;
    }

    bool Box::blocks_segment(const Vec3 &a, const Vec3 &b, double end_margin) const
    {
        // Slab test on the parametric segment a + t (b - a)
        const Vec3 d = b - a;
        double t_enter = end_margin;
        double t_exit = 1.0 - end_margin;
        for (int k = 0; k < 3; ++k)
        {
            if (d[k] == 0.0)
            {
                if (a[k] <= min[k] || a[k] >= max[k])
                    return false;
                continue;
            }
            double t0 = (min[k] - a[k]) / d[k];
            double t1 = (max[k] - a[k]) / d[k];
            if (t0 > t1)
                std::swap(t0, t1);
            t_enter = std::max(t_enter, t0);
            t_exit = std::min(t_exit, t1);
            if (t_enter >= t_exit)
                return false;
        }
        return true;
    }

    void Scene::validate() const
    {
        for (int k = 0; k < 3; ++k)
            if (!(room.min[k] < room.max[k]))
                throw InvalidInput("scene: room box has non-positive extent");
        for (int k = 0; k < 3; ++k)
            if (rx_region.min[k] > rx_region.max[k])
                throw InvalidInput("scene: rx_region min exceeds max");
        if (!room.contains(rx_region))
            throw InvalidInput("scene: rx_region is not inside the room");
        for (const auto &ob : obstacles)
        {
            if (!room.contains(ob))
                throw InvalidInput("scene: obstacle '" + ob.name + "' is not inside the room");
            for (int k = 0; k < 3; ++k)
                if (!(ob.min[k] < ob.max[k]))
                    throw InvalidInput("scene: obstacle '" + ob.name + "' has non-positive extent");
        }
        if (!room.contains(tx.position))
            throw InvalidInput("scene: TX position is outside the room");
        for (const auto *r : {&alpha_range, &beta_range, &gamma_range})
            if (r->lo > r->hi)
                throw InvalidInput("scene: orientation range has lo > hi");
    }

    bool Scene::inside_obstacle(const Vec3 &p) const
    {
        return std::any_of(obstacles.begin(), obstacles.end(),
                           [&](const Box &b)
                           { return b.contains(p); });
    }

    Scene living_room_scene(bool tilted_rx)
    {
        Scene s;
        // Floor at z = -1, ceiling at z = 2, TX mounted at the origin
        s.room = {Vec3(-1.0, -3.5, -1.0), Vec3(6.0, 3.5, 2.0), "room"};
        s.tx.position = Vec3::Zero();
        s.tx.orientation = {pi / 2.0, 0.0, 0.0};

        s.obstacles = {
            {Vec3(2.0, 2.7, -1.0), Vec3(4.0, 3.4, -0.15), "sofa_1"},
            {Vec3(5.1, -1.5, -1.0), Vec3(5.9, 1.5, -0.15), "sofa_2"},
            {Vec3(2.6, -0.5, -1.0), Vec3(3.8, 0.5, -0.45), "table"},
            {Vec3(0.6, 1.2, -1.0), Vec3(1.1, 1.7, 0.2), "chair"},
            {Vec3(0.7, -1.6, -1.0), Vec3(1.2, -1.0, 0.9), "cabinet"},
        };

        if (tilted_rx)
        {
            s.rx_region = {Vec3(1.5, -3.5, -0.5), Vec3(5.5, 3.5, 1.0), "service_area"};
            s.beta_range = {-pi / 4.0, pi / 4.0};
            s.gamma_range = {-pi / 4.0, pi / 4.0};
        }
        else
        {
            s.rx_region = {Vec3(1.5, -3.5, 0.0), Vec3(5.5, 3.5, 0.0), "service_area"};
        }
        s.alpha_range = {0.0, two_pi};
        return s;
    }

    Mat3 rotation_matrix(const Orientation &o)
    {
        const Mat3 rz = Eigen::AngleAxisd(o.alpha, Vec3::UnitZ()).toRotationMatrix();
        const Mat3 ry = Eigen::AngleAxisd(o.beta, Vec3::UnitY()).toRotationMatrix();
        const Mat3 rx = Eigen::AngleAxisd(o.gamma, Vec3::UnitX()).toRotationMatrix();
        return rz * ry * rx;
    }

    Vec3 spherical_to_unit(const Angles &a)
    {
        const double st = std::sin(a.theta);
        return {st * std::cos(a.phi), st * std::sin(a.phi), std::cos(a.theta)};
    }

    double wrap_two_pi(double angle)
    {
        double w = std::fmod(angle, two_pi);
        if (w < 0.0)
            w += two_pi;
        // fmod of a tiny negative value can round up to exactly 2pi
        if (w >= two_pi)
            w = 0.0;
        return w;
    }

    Angles global_to_local_angles(const Vec3 &direction, const Orientation &o)
    {
        const double n = direction.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw InvalidInput("global_to_local_angles: zero-length or non-finite direction");
        const Vec3 local = rotation_matrix(o).transpose() * (direction / n);
        Angles a;
        a.phi = wrap_two_pi(std::atan2(local.y(), local.x()));
        a.theta = std::acos(std::clamp(local.z(), -1.0, 1.0));
        return a;
    }

    Vec3 local_angles_to_global(const Angles &a, const Orientation &o)
    {
        return rotation_matrix(o) * spherical_to_unit(a);
    }

    namespace
    {
        double uniform_in(std::mt19937_64 &rng, double lo, double hi)
        {
            if (lo == hi)
            {
                rng.discard(1);
                return lo;
            }
            return std::uniform_real_distribution<double>(lo, hi)(rng);
        }
    }

    Pose sample_rx_pose(const Scene &scene, std::uint64_t rng_seed)
    {
        std::mt19937_64 rng(rng_seed);
        Pose p;
        for (int k = 0; k < 3; ++k)
            p.position[k] = uniform_in(rng, scene.rx_region.min[k], scene.rx_region.max[k]);
        p.orientation.alpha = uniform_in(rng, scene.alpha_range.lo, scene.alpha_range.hi);
        p.orientation.beta = uniform_in(rng, scene.beta_range.lo, scene.beta_range.hi);
        p.orientation.gamma = uniform_in(rng, scene.gamma_range.lo, scene.gamma_range.hi);
        return p;
    }
}
