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

#include "bmal/codebook.hpp"
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bmal
{
    CMat Codebook::matrix() const
    {
        CMat m(geometry.size(), size());
        for (int i = 0; i < size(); ++i)
            m.col(i) = beams[i].weights;
        return m;
    }

    double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

    SystemParams SystemParams::from_dbm(double p_t_dbm, double noise_dbm, double t_fr, double t_s,
                                        double carrier_hz, double snr_th_db)
    {
        SystemParams p;
        p.p_t = dbm_to_watts(p_t_dbm);
        p.sigma_n2 = dbm_to_watts(noise_dbm);
        p.t_fr = t_fr;
        p.t_s = t_s;
        p.carrier_hz = carrier_hz;
        p.snr_th_db = snr_th_db;
        p.validate();
        return p;
    }

    double SystemParams::snr_threshold() const { return std::pow(10.0, snr_th_db / 10.0); }

    void SystemParams::validate() const
    {
        if (!(p_t > 0.0) || !(sigma_n2 > 0.0) || !(t_fr > 0.0) || !(t_s > 0.0) || !(carrier_hz > 0.0))
            throw InvalidInput("system params: powers, times and carrier must be positive");
        if (!(t_s < t_fr))
            throw InvalidInput("system params: scan time must be shorter than the frame");
    }

    namespace
    {
        double dft_angle(int index_1based, int n)
        {
            return std::acos(static_cast<double>(2 * index_1based - 1 - n) / n);
        }
    }

    Codebook dft_codebook(const ArrayGeometry &g)
    {
        g.validate();
        Codebook cb;
        cb.geometry = g;
        cb.beams.reserve(g.size());
        if (g.kind == ArrayKind::ula)
        {
            for (int p = 1; p <= g.n_h; ++p)
            {
                Angles a{dft_angle(p, g.n_h), pi / 2.0};
                cb.beams.push_back({array_response(g, a), a});
            }
            return cb;
        }
        for (int a = 1; a <= g.n_h; ++a)
        {
            for (int b = 1; b <= g.n_v; ++b)
            {
                Angles ang{dft_angle(a, g.n_h), dft_angle(b, g.n_v)};
                cb.beams.push_back({array_response(g, ang), ang});
            }
        }
        return cb;
    }

    namespace
    {
        void check_dims(const CMat &h, const CVec &u, const CVec &v)
        {
            if (h.cols() != u.size() || h.rows() != v.size())
                throw InvalidInput("rss: precoder/combiner dimensions do not match the channel");
        }
    }

    double rss(const CMat &h, const CVec &u, const CVec &v, const SystemParams &params,
               const std::optional<CVec> &noise)
    {
        check_dims(h, u, v);
        cdouble y = std::sqrt(params.p_t) * v.dot(h * u);
        if (noise)
        {
            if (noise->size() != v.size())
                throw InvalidInput("rss: noise vector length does not match the combiner");
            y += v.dot(*noise);
        }
        return std::norm(y);
    }

    double snr(const CMat &h, const CVec &u, const CVec &v, const SystemParams &params)
    {
        return rss(h, u, v, params) / params.sigma_n2;
    }

    double ese(double snr_value, int n_b, const SystemParams &params)
    {
        if (n_b < 0)
            throw InvalidInput("ese: negative number of scanned pairs");
        const double scan = n_b * params.t_s;
        if (scan > params.t_fr * (1.0 + 1e-9))
            throw InvalidInput("ese: scanning time exceeds the frame time");
        if (snr_value < 0.0)
            throw InvalidInput("ese: negative SNR");
        const double prefactor = std::max(0.0, (params.t_fr - scan) / params.t_fr);
        if (prefactor == 0.0 || snr_value == 0.0)
            return 0.0;
        return prefactor * std::log2(1.0 + snr_value);
    }

    Eigen::MatrixXd rss_matrix(const CMat &h, const Codebook &tx_cb, const Codebook &rx_cb, const SystemParams &params)
    {
        if (h.cols() != tx_cb.geometry.size() || h.rows() != rx_cb.geometry.size())
            throw InvalidInput("rss_matrix: codebooks do not match the channel dimensions");
        // G(q, p) = v_q^H H u_p
        const CMat g = rx_cb.matrix().adjoint() * (h * tx_cb.matrix());
        return (params.p_t * g.cwiseAbs2()).transpose();
    }
}
