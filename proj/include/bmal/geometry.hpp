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

#ifndef BMAL_GEOMETRY_HPP
#define BMAL_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace bmal
{
    using Vec3 = Eigen::Vector3d;
    using Mat3 = Eigen::Matrix3d;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    // Array orientation: alpha about z, beta about y, gamma about x (radians)
    struct Orientation
    {
        double alpha = 0.0;
        double beta = 0.0;
        double gamma = 0.0;

        bool operator==(const Orientation &) const = default;
    };

    // Spherical angles: phi in the x-y plane from +x, theta measured from +z
    struct Angles
    {
        double phi = 0.0;
        double theta = 0.0;
    };

    // Axis-aligned box; used for the room, the obstacles and the RX service area
    struct Box
    {
        Vec3 min = Vec3::Zero();
        Vec3 max = Vec3::Zero();
        std::string name;

        bool contains(const Vec3 &p, double tol = 0.0) const;
        bool contains(const Box &other) const;
        bool strictly_contains(const Vec3 &p) const;

        // True if the open segment (a, b) passes through the box interior.
        // Endpoints within `end_margin` (fraction of the segment) are ignored so
        // that bounce points on a wall do not count as hits.
        bool blocks_segment(const Vec3 &a, const Vec3 &b, double end_margin = 1e-9) const;
    };

    struct AngleRange
    {
        double lo = 0.0;
        double hi = 0.0;
    };

    struct Pose
    {
        Vec3 position = Vec3::Zero();
        Orientation orientation;
    };

    struct Scene
    {
        Box room;
        std::vector<Box> obstacles;
        Pose tx;
        Box rx_region;
        AngleRange alpha_range{0.0, two_pi};
        AngleRange beta_range{0.0, 0.0};
        AngleRange gamma_range{0.0, 0.0};

        // Throws InvalidInput naming the first violated constraint
        void validate() const;

        // True if no tilt angles are sampled (linear-array mode)
        bool planar_orientation() const { return beta_range.lo == beta_range.hi && gamma_range.lo == gamma_range.hi && beta_range.lo == 0.0 && gamma_range.lo == 0.0; }

        bool inside_obstacle(const Vec3 &p) const;
    };

    // Default living-room layout (7 m x 7 m x 3 m, TX at the origin one meter above the floor).
    // Obstacle sizes are assumptions; `tilted_rx` selects the planar-array service area.
    Scene living_room_scene(bool tilted_rx = false);

    // R = Rz(alpha) * Ry(beta) * Rx(gamma)
    Mat3 rotation_matrix(const Orientation &o);

    // Unit vector for spherical angles (phi, theta)
    Vec3 spherical_to_unit(const Angles &a);

    // Angles of a global direction expressed in the frame rotated by `o`.
    // phi is wrapped into [0, 2pi), theta into [0, pi].
    Angles global_to_local_angles(const Vec3 &direction, const Orientation &o);

    // Inverse of global_to_local_angles
    Vec3 local_angles_to_global(const Angles &a, const Orientation &o);

    // Uniform location in the service area and uniform angles in their ranges
    Pose sample_rx_pose(const Scene &scene, std::uint64_t rng_seed);

    // Wrap into [0, 2pi)
    double wrap_two_pi(double angle);
}

#endif
