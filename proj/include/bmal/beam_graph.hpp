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

#ifndef BMAL_BEAM_GRAPH_HPP
#define BMAL_BEAM_GRAPH_HPP

#include "bmal/codebook.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace bmal
{
    struct Edge
    {
        int src = 0;
        int dst = 0;
        double delta = 0.0;
    };

    // Directed graph over codebook beams (0-based node indices).
    // Every node receives edges from the `k` peers whose pointing directions
    // correlate most with its own.
    class BeamGraph
    {
    public:
        int node_count() const { return static_cast<int>(angles_.size()); }
        int in_degree() const { return k_; }
        const std::vector<Angles> &node_angles() const { return angles_; }

        // Sources of the edges pointing at `node`, ascending
        const std::vector<int> &in_neighbors(int node) const;
        const std::vector<Edge> &edges() const { return edges_; }

        void write_csv(std::ostream &os) const;

        friend BeamGraph build_graph(const Codebook &cb, int k);

    private:
        int k_ = 0;
        std::vector<Angles> angles_;
        std::vector<std::vector<int>> in_;
        std::vector<Edge> edges_;
    };

    // Cosine similarity of the two pointing directions
    double angular_correlation(const Angles &a, const Angles &b);

    // Requires more than k beams; ties go to the lower index
    BeamGraph build_graph(const Codebook &cb, int k = 2);
}

#endif
