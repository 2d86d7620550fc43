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

#ifndef BMAL_CHANNEL_HPP
#define BMAL_CHANNEL_HPP

#include "bmal/geometry.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace bmal
{
    using cdouble = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;

    inline constexpr double speed_of_light = 299792458.0;

    enum class ArrayKind
    {
        ula,
        upa
    };

    // Half-wavelength spaced array. A ULA stores its element count in n_h (n_v = 1).
    struct ArrayGeometry
    {
        ArrayKind kind = ArrayKind::ula;
        int n_h = 1;
        int n_v = 1;

        static ArrayGeometry ula(int n);
        static ArrayGeometry upa(int n_h, int n_v);

        int size() const { return n_h * n_v; }
        void validate() const;
        std::string describe() const;

        bool operator==(const ArrayGeometry &) const = default;
    };

    // One specular propagation path. Angles are in the local frames of the arrays.
    struct PathComponent
    {
        double rho = 0.0;      // linear power gain
        double vartheta = 0.0; // phase [rad]
        Angles aod;
        Angles aoa;
        int order = 0; // number of wall bounces, 0 = LOS
        double length = 0.0;
    };

    struct TraceOptions
    {
        int max_order = 2;
        int max_paths = 20;
        double reflection_loss_db = 10.0; // power loss per bounce
        double carrier_hz = 60e9;
    };

    double wavelength(double carrier_hz);

    // Free-space gain with per-bounce loss; returns {rho, vartheta}
    std::pair<double, double> path_gain(double length, int order, double carrier_hz, double reflection_loss_db = 10.0);

    // Image-source enumeration of LOS, single- and double-bounce wall reflections.
    // Obstacles only block; they do not reflect. Output sorted by descending rho.
    std::vector<PathComponent> trace_paths(const Scene &scene, const Pose &tx, const Pose &rx, const TraceOptions &opt);

    // Unit-norm steering vector. UPA entries are flattened as i * n_v + j.
    CVec array_response(const ArrayGeometry &g, double phi, double theta);
    inline CVec array_response(const ArrayGeometry &g, const Angles &a) { return array_response(g, a.phi, a.theta); }

    // H = sum_l sqrt(rho_l) exp(j vartheta_l) a_r(aoa_l) a_t(aod_l)^H, size N_r x N_t.
    // `include_array_gain` multiplies the sum by sqrt(N_t N_r).
    // The sum runs in a canonical order so any permutation of `paths` gives the same bits.
    CMat channel_matrix(const std::vector<PathComponent> &paths, const ArrayGeometry &tx_geom,
                        const ArrayGeometry &rx_geom, bool include_array_gain = false);
}

#endif
