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

#ifndef BMAL_EVAL_HPP
#define BMAL_EVAL_HPP

#include "bmal/codebook.hpp"
#include "bmal/dataset.hpp"
#include "bmal/models.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bmal
{
    struct TrainConfig
    {
        double learning_rate = 1e-3;
        int batch_size = 128;
        int max_epochs = 100;
        int patience = 10;                // epochs without validation improvement
        double validation_fraction = 0.1; // carved from the training split
        std::uint64_t seed = 1;

        void validate() const;
    };

    struct TrainResult
    {
        std::vector<double> train_loss; // mean per-sample loss of each epoch
        std::vector<double> val_loss;
        int best_epoch = -1; // 0-based epoch whose weights were restored
        int epochs_run = 0;
        bool early_stopped = false;
    };

    using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

    // Mini-batch Adam on the model's cross-entropy loss with early stopping on a
    // held-out part of `train_set`; the best-validation weights are restored.
    TrainResult train(BeamModel &model, const Dataset &train_set, const TrainConfig &cfg,
                      const EpochCallback &on_epoch = {});

    // Pilot measurement over the candidate set: the strongest detectable pair, ties to
    // the lower flat index. A pair is detectable when its SNR reaches the threshold.
    std::optional<BeamPair> measure_and_select(const std::vector<BeamPair> &candidates, const Sample &sample,
                                               int n_rx, const SystemParams &params);

    // Strongest candidate by stored RSS, ties to the lower flat index
    BeamPair strongest_candidate(const std::vector<BeamPair> &candidates, const Sample &sample, int n_rx);

    struct EvalPoint
    {
        int n_b = 0;
        double misalignment = 0.0;
        double ese = 0.0;     // bits/s/Hz, averaged over samples
        double rss_dbm = 0.0; // mean achieved RSS (linear average, undetected counts as 0 W)
        std::size_t misaligned = 0;
        std::size_t undetected = 0;      // no candidate reached the SNR threshold
        double argmax_misalignment = 0.0; // strongest candidate vs label, threshold ignored
    };

    struct EvalReport
    {
        std::string model;
        double sigma_p = 0.0;
        double sigma_o = 0.0;
        std::size_t n_samples = 0;
        std::vector<EvalPoint> points;
    };

    // Pair-probability matrix for one (possibly perturbed) sample
    using Predictor = std::function<Eigen::MatrixXd(const Sample &)>;

    // Misalignment, ESE and RSS per candidate-set size. The result does not depend on `threads`.
    EvalReport evaluate(const Predictor &predict, const Dataset &test_set, const std::vector<int> &n_b_list,
                        const SystemParams &params, const std::string &model_name, int threads = 1);

    EvalReport evaluate(const BeamModel &model, const Dataset &test_set, const std::vector<int> &n_b_list,
                        const SystemParams &params, int threads = 1);

    // Evaluates on perturbed copies of the test inputs for every (sigma_p, sigma_o) combination.
    // Each sample's noise draw depends only on (seed, sample index).
    std::vector<EvalReport> robustness_sweep(const BeamModel &model, const Dataset &test_set,
                                             const std::vector<double> &sigma_p_list,
                                             const std::vector<double> &sigma_o_list,
                                             const std::vector<int> &n_b_list, const SystemParams &params,
                                             std::uint64_t seed, int threads = 1);

    Dataset perturb_dataset(const Dataset &d, double sigma_p, double sigma_o, std::uint64_t seed);

    // Header: model,n_b,sigma_p,sigma_o,misalignment,ese_bps_hz,rss_dbm,n_samples
    void write_metrics_csv(const std::vector<EvalReport> &reports, std::ostream &os, bool header = true);

    inline const std::vector<int> default_n_b_grid = {1, 2, 3, 5, 8, 13, 21, 34};

    // Wilson score interval for k successes out of n
    std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);
}

#endif
