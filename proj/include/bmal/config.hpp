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

#ifndef BMAL_CONFIG_HPP
#define BMAL_CONFIG_HPP

#include "bmal/dataset.hpp"
#include "bmal/eval.hpp"
#include "bmal/models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bmal
{
    struct SweepConfig
    {
        std::vector<double> size_fractions = {0.2, 1.0};
        std::vector<std::string> models = {"gnn", "dnn"};
        std::vector<std::uint64_t> seeds = {1};
        std::vector<double> sigma_p = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        std::vector<double> sigma_o = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        std::vector<int> antenna_n_t = {16, 32, 64}; // swept with the configured RX array
        std::vector<int> antenna_n_r;                // swept with the configured TX array when non-empty
    };

    struct ExperimentConfig
    {
        GenerationConfig generation;
        std::size_t n_samples = 70000;
        std::uint64_t data_seed = 1;
        double train_fraction = 0.8;
        std::uint64_t split_seed = 2;

        GnnHyper gnn;
        DnnHyper dnn;
        TrainConfig train;

        std::vector<int> n_b = default_n_b_grid;
        std::uint64_t perturb_seed = 3;
        SweepConfig sweep;
        std::vector<std::string> stages = {"gen", "train", "eval"};

        int threads = 1;
        std::uint64_t config_hash = 0; // FNV-1a of the source text
    };

    // Parses YAML text. Unknown keys and wrong types raise ConfigError naming the field path.
    ExperimentConfig parse_config(const std::string &text);
    ExperimentConfig load_config(const std::string &path);
}

#endif
