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

#ifndef BMAL_EXPERIMENT_HPP
#define BMAL_EXPERIMENT_HPP

#include "bmal/checkpoint.hpp"
#include "bmal/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace bmal
{
    inline constexpr const char *bmal_version = "1.0.0";

    // Seeds every stage from one master seed
    void apply_seed_override(ExperimentConfig &cfg, std::uint64_t seed);

    ModelShape model_shape(const ExperimentConfig &cfg, const GenerationConfig &gen, const std::string &kind);

    struct TrainedModel
    {
        std::unique_ptr<BeamModel> model;
        TrainResult result;
        CheckpointInfo info;
    };

    // Glorot init from `seed`, then train on `train_set`
    TrainedModel train_model(const ExperimentConfig &cfg, const Dataset &train_set, const std::string &kind,
                             std::uint64_t seed, const EpochCallback &on_epoch = {});

    // Log sink; null means quiet
    using Log = std::ostream *;

    // Each model is trained on the first `fraction` of one seeded permutation of the training split.
    // Results are averaged over the sweep seeds; labels read "<model>_frac<f>".
    std::vector<EvalReport> sweep_size(const ExperimentConfig &cfg, const Dataset &train_set, const Dataset &test_set, Log log = nullptr);

    // sigma_p varies with sigma_o = 0, then sigma_o varies with sigma_p = 0; averaged over the sweep seeds
    std::vector<EvalReport> sweep_noise(const ExperimentConfig &cfg, const Dataset &train_set, const Dataset &test_set, Log log = nullptr);

    // Regenerates the dataset for every array size; labels read "<model>_nt<N_t>_nr<N_r>"
    std::vector<EvalReport> sweep_antenna(const ExperimentConfig &cfg, Log log = nullptr);

    struct Series
    {
        std::string name;
        std::vector<double> x;
        std::vector<double> y;
    };

    void write_svg_chart(std::ostream &os, const std::string &title, const std::string &x_label,
                         const std::string &y_label, const std::vector<Series> &series);

    // One chart per metric (misalignment, ESE, RSS) written next to `stem`: stem_<metric>.svg.
    // `x_axis` is "n_b", "sigma_p" or "sigma_o". Returns the written paths.
    std::vector<std::string> write_metric_charts(const std::vector<EvalReport> &reports, const std::string &stem,
                                                 const std::string &x_axis);

    // Header: method,multiplications,parameters
    void write_complexity_csv(const ExperimentConfig &cfg, std::ostream &os);

    // Runs the configured stages into `out_dir` and writes manifest.json; returns the manifest path
    std::string run_experiment(const ExperimentConfig &cfg, const std::string &out_dir, Log log = nullptr);

    // Runs one sweep kind ("size", "noise", "antenna") into `out_dir`
    std::string run_sweep(const ExperimentConfig &cfg, const std::string &kind, const std::string &out_dir, Log log = nullptr);
}

#endif
