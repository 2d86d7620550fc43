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

#ifndef BMAL_TESTS_TOY_DATA_HPP
#define BMAL_TESTS_TOY_DATA_HPP

#include "bmal/dataset.hpp"

#include <random>

namespace bmal::testing
{
    // Synthetic samples with uniform random labels; the labeled pair is the strongest
    // and every pair is detectable under default system parameters.
    inline Dataset toy_dataset(int n_tx, int n_rx, std::size_t n, std::uint64_t seed)
    {
        Dataset d;
        d.header.tx = ArrayGeometry::ula(n_tx);
        d.header.rx = ArrayGeometry::ula(n_rx);
        d.header.rx_region = living_room_scene().rx_region;
        d.header.seed = seed;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> x(1.5, 5.5), y(-3.5, 3.5), a(0.0, 6.283185307179586);
        std::uniform_real_distribution<float> level(1e-9f, 5e-9f);
        std::uniform_int_distribution<int> pt(0, n_tx - 1), pr(0, n_rx - 1);
        for (std::size_t i = 0; i < n; ++i)
        {
            Sample s;
            s.location = Vec3(x(rng), y(rng), 0.0);
            s.orientation = {a(rng), 0.0, 0.0};
            s.rss.resize(static_cast<std::size_t>(n_tx) * n_rx);
            for (auto &r : s.rss)
                r = level(rng);
            s.label = {pt(rng), pr(rng)};
            s.rss[static_cast<std::size_t>(s.label.tx) * n_rx + s.label.rx] = 1e-8f;
            d.samples.push_back(std::move(s));
        }
        return d;
    }
}

#endif
