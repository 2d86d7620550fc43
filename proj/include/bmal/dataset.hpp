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

#ifndef BMAL_DATASET_HPP
#define BMAL_DATASET_HPP

#include "bmal/channel.hpp"
#include "bmal/codebook.hpp"
#include "bmal/geometry.hpp"
#include "bmal/models.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace bmal
{
    // Everything needed to turn a pose into a labeled sample
    struct GenerationConfig
    {
        Scene scene = living_room_scene();
        ArrayGeometry tx = ArrayGeometry::ula(64);
        ArrayGeometry rx = ArrayGeometry::ula(16);
        SystemParams params;
        TraceOptions trace;
        bool array_gain = true; // scale H by sqrt(N_t N_r)

        InputMode input_mode() const;
    };

    // Stable 64-bit digest of the generating configuration
    std::uint64_t scene_hash(const GenerationConfig &cfg);

    struct Sample
    {
        Vec3 location = Vec3::Zero();
        Orientation orientation;
        std::vector<float> rss; // N_t x N_r, row p holds TX beam p [W]
        BeamPair label;

        Pose pose() const { return {location, orientation}; }
        float rss_at(BeamPair bp, int n_rx) const { return rss[static_cast<std::size_t>(bp.tx) * n_rx + bp.rx]; }

        bool operator==(const Sample &) const = default;
    };

    struct DatasetHeader
    {
        ArrayGeometry tx;
        ArrayGeometry rx;
        SystemParams params;
        Box rx_region;
        bool full_orientation = false;
        std::uint64_t scene_hash = 0;
        std::uint64_t seed = 0;
    };

    struct Dataset
    {
        DatasetHeader header;
        std::vector<Sample> samples;

        int n_tx() const { return header.tx.size(); }
        int n_rx() const { return header.rx.size(); }
        std::size_t size() const { return samples.size(); }
        InputMode input_mode() const { return header.full_orientation ? InputMode::full_orientation : InputMode::azimuth_only; }
        InputNormalizer normalizer() const { return InputNormalizer(header.rx_region); }

        // Same header, selected samples in the given order
        Dataset subset(const std::vector<std::size_t> &indices) const;
    };

    // Noiseless RSS over all beam pairs for one RX pose (64-bit)
    Eigen::MatrixXd simulate_rss(const GenerationConfig &cfg, const Pose &rx_pose);

    // Argmax with ties resolved to the lowest flat index
    BeamPair label(const Eigen::MatrixXd &rss);

    // Per-sample seeds are derived from (master_seed, index) so the result does not
    // depend on `threads`. Poses falling inside an obstacle are redrawn.
    Dataset generate_dataset(const GenerationConfig &cfg, std::size_t n_samples, std::uint64_t master_seed, int threads = 1);

    // Gaussian pose error; azimuth wraps, tilts clamp. RSS and label are untouched.
    Sample perturb(const Sample &s, double sigma_p, double sigma_o, bool tilt, std::mt19937_64 &rng);

    // Seeded shuffle, first round(fraction * n) samples go to the first set
    std::pair<Dataset, Dataset> split(const Dataset &d, double train_fraction, std::uint64_t seed);

    void save(const Dataset &d, const std::string &path);
    Dataset load(const std::string &path);

    // Serialized bytes of `d` (what save writes)
    std::vector<char> serialize(const Dataset &d);
    Dataset deserialize(std::vector<char> bytes);

    // One row per sample: x,y,z,alpha[,beta,gamma],p_star,q_star[,rss_p_q...]
    void export_csv(const Dataset &d, std::ostream &os, bool include_rss);

    inline constexpr std::uint32_t dataset_format_version = 1;
}

#endif
