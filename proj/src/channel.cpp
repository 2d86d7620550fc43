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

#include "bmal/channel.hpp"
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

namespace bmal
{
    ArrayGeometry ArrayGeometry::ula(int n)
    {
        ArrayGeometry g{ArrayKind::ula, n, 1};
        g.validate();
        return g;
    }

    ArrayGeometry ArrayGeometry::upa(int n_h, int n_v)
    {
        ArrayGeometry g{ArrayKind::upa, n_h, n_v};
        g.validate();
        return g;
    }

    void ArrayGeometry::validate() const
    {
        if (n_h < 1 || n_v < 1)
            throw InvalidInput("array geometry: element counts must be >= 1");
        if (kind == ArrayKind::ula && n_v != 1)
            throw InvalidInput("array geometry: a ULA has a single vertical element");
    }

    std::string ArrayGeometry::describe() const
    {
        if (kind == ArrayKind::ula)
            return "ula" + std::to_string(n_h);
        return "upa" + std::to_string(n_h) + "x" + std::to_string(n_v);
    }

    double wavelength(double carrier_hz)
    {
        if (!(carrier_hz > 0.0))
            throw InvalidInput("carrier frequency must be positive");
        return speed_of_light / carrier_hz;
    }

    std::pair<double, double> path_gain(double length, int order, double carrier_hz, double reflection_loss_db)
    {
        if (!(length > 0.0) || !std::isfinite(length))
            throw InvalidInput("path_gain: path length must be positive");
        if (order < 0)
            throw InvalidInput("path_gain: negative reflection order");
        const double lambda = wavelength(carrier_hz);
        const double friis = lambda / (4.0 * pi * length);
        const double bounce = std::pow(10.0, -reflection_loss_db / 10.0);
        const double rho = friis * friis * std::pow(bounce, order);
        const double vartheta = wrap_two_pi(-two_pi * length / lambda);
        return {rho, vartheta};
    }

    namespace
    {
        struct Wall
        {
            int axis;
            double value;
        };

        std::vector<Wall> room_walls(const Box &room)
        {
            std::vector<Wall> walls;
            for (int k = 0; k < 3; ++k)
            {
                walls.push_back({k, room.min[k]});
                walls.push_back({k, room.max[k]});
            }
            return walls;
        }

        Vec3 mirror(const Vec3 &p, const Wall &w)
        {
            Vec3 m = p;
            m[w.axis] = 2.0 * w.value - p[w.axis];
            return m;
        }

        // Point where the segment from -> to crosses the wall plane, if it lies on the wall face
        std::optional<Vec3> hit_wall(const Vec3 &from, const Vec3 &to, const Wall &w, const Box &room)
        {
            const double denom = to[w.axis] - from[w.axis];
            if (denom == 0.0)
                return std::nullopt;
            const double t = (w.value - from[w.axis]) / denom;
            if (!(t > 0.0 && t < 1.0))
                return std::nullopt;
            Vec3 p = from + t * (to - from);
            p[w.axis] = w.value;
            if (!room.contains(p, 1e-9))
                return std::nullopt;
            return p;
        }

        bool segment_clear(const Scene &scene, const Vec3 &a, const Vec3 &b)
        {
            return std::none_of(scene.obstacles.begin(), scene.obstacles.end(),
                                [&](const Box &ob)
                                { return ob.blocks_segment(a, b); });
        }

        constexpr double min_leg = 1e-9;
    }

    std::vector<PathComponent> trace_paths(const Scene &scene, const Pose &tx, const Pose &rx, const TraceOptions &opt)
    {
        if (opt.max_order < 0 || opt.max_order > 2)
            throw InvalidInput("trace_paths: max_order must be 0, 1 or 2");
        if (opt.max_paths < 1)
            throw InvalidInput("trace_paths: max_paths must be >= 1");
        if (!scene.room.contains(rx.position))
            throw InvalidInput("trace_paths: RX is outside the room");
        if (!scene.room.contains(tx.position))
            throw InvalidInput("trace_paths: TX is outside the room");
        if ((tx.position - rx.position).norm() < min_leg)
            throw InvalidInput("trace_paths: TX and RX positions coincide");

        std::vector<PathComponent> paths;

        // `points` runs TX, bounce points..., RX
        auto add_path = [&](const std::vector<Vec3> &points)
        {
            double length = 0.0;
            for (size_t i = 1; i < points.size(); ++i)
            {
                const double leg = (points[i] - points[i - 1]).norm();
                if (leg < min_leg)
                    return;
                if (!segment_clear(scene, points[i - 1], points[i]))
                    return;
                length += leg;
            }
            PathComponent pc;
            pc.order = static_cast<int>(points.size()) - 2;
            pc.length = length;
            std::tie(pc.rho, pc.vartheta) = path_gain(length, pc.order, opt.carrier_hz, opt.reflection_loss_db);
            pc.aod = global_to_local_angles(points[1] - points[0], tx.orientation);
            pc.aoa = global_to_local_angles(points[points.size() - 2] - points.back(), rx.orientation);
            paths.push_back(pc);
        };

        const Vec3 &pt = tx.position;
        const Vec3 &pr = rx.position;
        add_path({pt, pr});

        const auto walls = room_walls(scene.room);
        if (opt.max_order >= 1)
        {
            for (const auto &w : walls)
            {
                const Vec3 image = mirror(pt, w);
                if (auto p1 = hit_wall(image, pr, w, scene.room))
                    add_path({pt, *p1, pr});
            }
        }
        if (opt.max_order >= 2)
        {
            for (size_t i = 0; i < walls.size(); ++i)
            {
                for (size_t j = 0; j < walls.size(); ++j)
                {
                    if (i == j)
                        continue;
                    const Vec3 image1 = mirror(pt, walls[i]);
                    const Vec3 image2 = mirror(image1, walls[j]);
                    auto p2 = hit_wall(image2, pr, walls[j], scene.room);
                    if (!p2)
                        continue;
                    auto p1 = hit_wall(image1, *p2, walls[i], scene.room);
                    if (!p1)
                        continue;
                    add_path({pt, *p1, *p2, pr});
                }
            }
        }

        std::stable_sort(paths.begin(), paths.end(),
                         [](const PathComponent &a, const PathComponent &b)
                         { return a.rho > b.rho; });
        if (paths.size() > static_cast<size_t>(opt.max_paths))
            paths.resize(static_cast<size_t>(opt.max_paths));
        return paths;
    }

    CVec array_response(const ArrayGeometry &g, double phi, double theta)
    {
        g.validate();
        const double u = std::sin(theta) * std::cos(phi);
        const double w = std::cos(theta);
        const double norm = 1.0 / std::sqrt(static_cast<double>(g.size()));
        CVec a(g.size());
        for (int i = 0; i < g.n_h; ++i)
            for (int j = 0; j < g.n_v; ++j)
                a[i * g.n_v + j] = norm * std::polar(1.0, pi * (i * u + j * w));
        return a;
    }

    CMat channel_matrix(const std::vector<PathComponent> &paths, const ArrayGeometry &tx_geom,
                        const ArrayGeometry &rx_geom, bool include_array_gain)
    {
        CMat h = CMat::Zero(rx_geom.size(), tx_geom.size());
        if (paths.empty())
            return h;

        auto key = [](const PathComponent &p)
        { return std::make_tuple(-p.rho, p.vartheta, p.aod.phi, p.aod.theta, p.aoa.phi, p.aoa.theta, p.order, p.length); };
        std::vector<const PathComponent *> ordered;
        ordered.reserve(paths.size());
        for (const auto &p : paths)
            ordered.push_back(&p);
        std::sort(ordered.begin(), ordered.end(), [&](const auto *a, const auto *b)
                  { return key(*a) < key(*b); });

        for (const auto *p : ordered)
        {
            if (p->rho < 0.0)
                throw InvalidInput("channel_matrix: negative path gain");
            const cdouble coeff = std::sqrt(p->rho) * std::polar(1.0, p->vartheta);
            const CVec ar = array_response(rx_geom, p->aoa);
            const CVec at = array_response(tx_geom, p->aod);
            h.noalias() += coeff * ar * at.adjoint();
        }
        if (include_array_gain)
            h *= std::sqrt(static_cast<double>(tx_geom.size()) * rx_geom.size());
        return h;
    }
}
