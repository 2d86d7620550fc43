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
#include "bmal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace bmal
{
    double angular_correlation(const Angles &a, const Angles &b)
    {
        const double d = std::sin(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi) +
                         std::cos(a.theta) * std::cos(b.theta);
        return std::clamp(d, -1.0, 1.0);
    }

    const std::vector<int> &BeamGraph::in_neighbors(int node) const
    {
        if (node < 0 || node >= node_count())
            throw InvalidInput("in_neighbors: node index " + std::to_string(node) + " out of range");
        return in_[node];
    }

    void BeamGraph::write_csv(std::ostream &os) const
    {
        os << "src,dst,delta\n";
        const auto old_precision = os.precision(17);
        for (const auto &e : edges_)
            os << e.src << ',' << e.dst << ',' << e.delta << '\n';
        os.precision(old_precision);
    }

    BeamGraph build_graph(const Codebook &cb, int k)
    {
        const int n = cb.size();
        if (k < 1)
            throw InvalidInput("build_graph: in-degree must be >= 1");
        if (n < k + 1)
            throw InvalidInput("build_graph: codebook needs at least " + std::to_string(k + 1) + " beams");

        BeamGraph g;
        g.k_ = k;
        g.angles_.reserve(n);
        for (const auto &b : cb.beams)
            g.angles_.push_back(b.angles);
        g.in_.resize(n);

        std::vector<int> order;
        std::vector<double> delta(n);
        for (int i = 0; i < n; ++i)
        {
            for (int j = 0; j < n; ++j)
                delta[j] = angular_correlation(g.angles_[i], g.angles_[j]);
            order.resize(n);
            std::iota(order.begin(), order.end(), 0);
            order.erase(order.begin() + i);
            std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b)
                              { return delta[a] != delta[b] ? delta[a] > delta[b] : a < b; });
            std::vector<int> nb(order.begin(), order.begin() + k);
            std::sort(nb.begin(), nb.end());
            for (int j : nb)
                g.edges_.push_back({j, i, delta[j]});
            g.in_[i] = std::move(nb);
        }
        return g;
    }
}
