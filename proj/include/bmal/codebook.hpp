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

#ifndef BMAL_CODEBOOK_HPP
#define BMAL_CODEBOOK_HPP

#include "bmal/channel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace bmal
{
    struct Beam
    {
        CVec weights; // unit norm
        Angles angles;
    };

    struct Codebook
    {
        ArrayGeometry geometry;
        std::vector<Beam> beams;

        int size() const { return static_cast<int>(beams.size()); }

        // Codewords stacked as columns
        CMat matrix() const;
    };

    // Link-level constants; all powers are linear watts
    struct SystemParams
    {
        double p_t = 1e-3;             // transmit power (0 dBm)
        double sigma_n2 = 3.981e-12;   // noise power (-84 dBm)
        double t_fr = 20e-3;           // frame time [s]
        double t_s = 0.1e-3;           // time to scan one beam pair [s]
        double carrier_hz = 60e9;
        double snr_th_db = 10.0;       // detectability threshold for pilot measurements

        static SystemParams from_dbm(double p_t_dbm, double noise_dbm, double t_fr, double t_s,
                                     double carrier_hz, double snr_th_db);
        double snr_threshold() const;
        void validate() const;
    };

    double dbm_to_watts(double dbm);
    double watts_to_dbm(double watts);

    // ULA: phi_p = arccos((2p - 1 - N) / N), theta = pi/2.
    // UPA: beam (a, b) points at (arccos((2a-1-N_h)/N_h), arccos((2b-1-N_v)/N_v)), index a * N_v + b.
    Codebook dft_codebook(const ArrayGeometry &g);

    // ||sqrt(P_t) v^H H u s + v^H n||^2 with unit pilot s
    double rss(const CMat &h, const CVec &u, const CVec &v, const SystemParams &params,
               const std::optional<CVec> &noise = std::nullopt);

    // Noiseless RSS divided by the noise power
    double snr(const CMat &h, const CVec &u, const CVec &v, const SystemParams &params);

    // (T_fr - n_b T_s) / T_fr * log2(1 + snr)
    double ese(double snr_value, int n_b, const SystemParams &params);

    // Noiseless RSS for every (TX beam p, RX beam q); rows index p
    Eigen::MatrixXd rss_matrix(const CMat &h, const Codebook &tx_cb, const Codebook &rx_cb, const SystemParams &params);
}

#endif
