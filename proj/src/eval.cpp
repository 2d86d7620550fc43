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

#include "bmal/eval.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"
#include "bmal/parallel.hpp"
#include "bmal/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace bmal
{
    void TrainConfig::validate() const
    {
        if (!(learning_rate > 0.0) || batch_size < 1 || max_epochs < 1 || patience < 1)
            throw InvalidInput("train config: learning rate, batch size, epochs and patience must be positive");
        if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
            throw InvalidInput("train config: validation fraction must lie in [0, 1)");
    }

    namespace
    {
        void check_model_matches(const BeamModel &model, const Dataset &d)
        {
            if (model.n_tx() != d.n_tx() || model.n_rx() != d.n_rx())
                throw InvalidInput("model is sized for " + std::to_string(model.n_tx()) + "x" + std::to_string(model.n_rx()) +
                                   " beams but the dataset has " + std::to_string(d.n_tx()) + "x" + std::to_string(d.n_rx()));
        }

        std::vector<std::vector<double>> snapshot(const BeamModel &model)
        {
            std::vector<std::vector<double>> s;
            for (const auto *t : model.parameters())
                s.push_back(t->value);
            return s;
        }

        void restore(BeamModel &model, const std::vector<std::vector<double>> &s)
        {
            auto params = model.parameters();
            for (std::size_t k = 0; k < params.size(); ++k)
                params[k]->value = s[k];
        }
    }

    TrainResult train(BeamModel &model, const Dataset &train_set, const TrainConfig &cfg, const EpochCallback &on_epoch)
    {
        cfg.validate();
        if (train_set.size() == 0)
            throw InvalidInput("train: empty training set");
        check_model_matches(model, train_set);

        const auto norm = train_set.normalizer();
        std::vector<UeContext> ctx(train_set.size());
        for (std::size_t i = 0; i < train_set.size(); ++i)
            ctx[i] = norm.context(train_set.samples[i].pose());

        // Hold out a validation part; tiny sets validate on the training samples
        std::mt19937_64 rng(cfg.seed);
        std::vector<std::size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(order.size())));
        std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
        std::vector<std::size_t> fit_idx(order.begin() + n_val, order.end());
        if (val_idx.empty())
            val_idx = fit_idx;

        auto params = model.parameters();
        nn::AdamState adam;
        adam.learning_rate = cfg.learning_rate;

        auto validation_loss = [&]
        {
            double sum = 0.0;
            for (auto i : val_idx)
                sum += model.loss(ctx[i], train_set.samples[i].label);
            return sum / static_cast<double>(val_idx.size());
        };

        TrainResult result;
        double best = std::numeric_limits<double>::infinity();
        auto best_params = snapshot(model);
        int since_best = 0;

        for (int epoch = 0; epoch < cfg.max_epochs; ++epoch)
        {
            std::shuffle(fit_idx.begin(), fit_idx.end(), rng);
            double epoch_loss = 0.0;
            for (std::size_t start = 0; start < fit_idx.size(); start += cfg.batch_size)
            {
                const std::size_t end = std::min(fit_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
                nn::zero_grads(params);
                for (std::size_t b = start; b < end; ++b)
                {
                    const auto i = fit_idx[b];
                    const double l = model.accumulate_gradients(ctx[i], train_set.samples[i].label);
                    if (!std::isfinite(l))
                        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch));
                    epoch_loss += l;
                }
                const double scale = 1.0 / static_cast<double>(end - start);
                for (auto *t : params)
                {
                    for (auto &g : t->grad)
                        g *= scale;
                    nn::check_finite(t->grad, "gradients in epoch " + std::to_string(epoch));
                }
                nn::adam_step(adam, params);
            }
            epoch_loss /= static_cast<double>(fit_idx.size());
            const double val = validation_loss();
            if (!std::isfinite(val))
                throw NumericError("train: non-finite validation loss in epoch " + std::to_string(epoch));
            result.train_loss.push_back(epoch_loss);
            result.val_loss.push_back(val);
            result.epochs_run = epoch + 1;
            if (on_epoch)
                on_epoch(epoch, epoch_loss, val);

            if (val < best)
            {
                best = val;
                best_params = snapshot(model);
                result.best_epoch = epoch;
                since_best = 0;
            }
            else if (++since_best >= cfg.patience)
            {
                result.early_stopped = true;
                break;
            }
        }
        restore(model, best_params);
        return result;
    }

    std::optional<BeamPair> measure_and_select(const std::vector<BeamPair> &candidates, const Sample &sample,
                                               int n_rx, const SystemParams &params)
    {
        const double threshold = params.snr_threshold();
        std::optional<BeamPair> best;
        float best_rss = 0.0f;
        int best_flat = 0;
        for (const auto &c : candidates)
        {
            const float r = sample.rss_at(c, n_rx);
            if (static_cast<double>(r) / params.sigma_n2 < threshold)
                continue;
            const int flat = c.tx * n_rx + c.rx;
            if (!best || r > best_rss || (r == best_rss && flat < best_flat))
            {
                best = c;
                best_rss = r;
                best_flat = flat;
            }
        }
        return best;
    }

    BeamPair strongest_candidate(const std::vector<BeamPair> &candidates, const Sample &sample, int n_rx)
    {
        if (candidates.empty())
            throw InvalidInput("strongest_candidate: empty candidate set");
        BeamPair best = candidates.front();
        for (const auto &c : candidates)
        {
            const float r = sample.rss_at(c, n_rx), b = sample.rss_at(best, n_rx);
            if (r > b || (r == b && c.tx * n_rx + c.rx < best.tx * n_rx + best.rx))
                best = c;
        }
        return best;
    }

    EvalReport evaluate(const Predictor &predict, const Dataset &test_set, const std::vector<int> &n_b_list,
                        const SystemParams &params, const std::string &model_name, int threads)
    {
        if (test_set.size() == 0)
            throw InvalidInput("evaluate: empty test set");
        if (n_b_list.empty())
            throw InvalidInput("evaluate: no candidate-set sizes given");
        const int total = test_set.n_tx() * test_set.n_rx();
        for (int n_b : n_b_list)
            if (n_b < 1 || n_b > total)
                throw InvalidInput("evaluate: n_b " + std::to_string(n_b) + " outside [1, " + std::to_string(total) + "]");
        const int max_nb = *std::max_element(n_b_list.begin(), n_b_list.end());
        const int n_rx = test_set.n_rx();
        const std::size_t n = test_set.size(), k = n_b_list.size();

        // Per-sample results, reduced serially afterwards
        std::vector<unsigned char> miss(n * k), lost(n * k), argmax_miss(n * k);
        std::vector<double> ese_v(n * k), rss_v(n * k);

        parallel_for(n, threads, [&](std::size_t i)
                     {
            const Sample &s = test_set.samples[i];
            const auto probs = predict(s);
            if (probs.rows() != test_set.n_tx() || probs.cols() != n_rx)
                throw InvalidInput("evaluate: predictor returned a matrix of the wrong size");
            const auto ranked = top_nb_candidates(probs, max_nb);
            for (std::size_t j = 0; j < k; ++j)
            {
                const int n_b = n_b_list[j];
                const std::vector<BeamPair> cand(ranked.begin(), ranked.begin() + n_b);
                const auto chosen = measure_and_select(cand, s, n_rx, params);
                miss[i * k + j] = !chosen || !(*chosen == s.label);
                lost[i * k + j] = !chosen;
                argmax_miss[i * k + j] = !(strongest_candidate(cand, s, n_rx) == s.label);
                if (chosen)
                {
                    const double r = s.rss_at(*chosen, n_rx);
                    rss_v[i * k + j] = r;
                    // No airtime is left once scanning fills the frame
                    ese_v[i * k + j] = n_b * params.t_s <= params.t_fr ? ese(r / params.sigma_n2, n_b, params) : 0.0;
                }
            } });

        EvalReport rep;
        rep.model = model_name;
        rep.n_samples = n;
        for (std::size_t j = 0; j < k; ++j)
        {
            EvalPoint pt;
            pt.n_b = n_b_list[j];
            double ese_sum = 0.0, rss_sum = 0.0;
            std::size_t argmax_count = 0;
            for (std::size_t i = 0; i < n; ++i)
            {
                pt.misaligned += miss[i * k + j];
                pt.undetected += lost[i * k + j];
                argmax_count += argmax_miss[i * k + j];
                ese_sum += ese_v[i * k + j];
                rss_sum += rss_v[i * k + j];
            }
            pt.misalignment = static_cast<double>(pt.misaligned) / static_cast<double>(n);
            pt.argmax_misalignment = static_cast<double>(argmax_count) / static_cast<double>(n);
            pt.ese = ese_sum / static_cast<double>(n);
            pt.rss_dbm = watts_to_dbm(rss_sum / static_cast<double>(n));
            rep.points.push_back(pt);
        }
        return rep;
    }

    EvalReport evaluate(const BeamModel &model, const Dataset &test_set, const std::vector<int> &n_b_list,
                        const SystemParams &params, int threads)
    {
        check_model_matches(model, test_set);
        const auto norm = test_set.normalizer();
        return evaluate([&](const Sample &s)
                        { return model.predict(norm.context(s.pose())); },
                        test_set, n_b_list, params, model.kind(), threads);
    }

    Dataset perturb_dataset(const Dataset &d, double sigma_p, double sigma_o, std::uint64_t seed)
    {
        Dataset out;
        out.header = d.header;
        out.samples.reserve(d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            std::mt19937_64 rng(io::mix_seed(seed, i));
            out.samples.push_back(perturb(d.samples[i], sigma_p, sigma_o, d.header.full_orientation, rng));
        }
        return out;
    }

    std::vector<EvalReport> robustness_sweep(const BeamModel &model, const Dataset &test_set,
                                             const std::vector<double> &sigma_p_list,
                                             const std::vector<double> &sigma_o_list,
                                             const std::vector<int> &n_b_list, const SystemParams &params,
                                             std::uint64_t seed, int threads)
    {
        std::vector<EvalReport> out;
        for (double sp : sigma_p_list)
        {
            for (double so : sigma_o_list)
            {
                auto rep = evaluate(model, perturb_dataset(test_set, sp, so, seed), n_b_list, params, threads);
                rep.sigma_p = sp;
                rep.sigma_o = so;
                out.push_back(std::move(rep));
            }
        }
        return out;
    }

    void write_metrics_csv(const std::vector<EvalReport> &reports, std::ostream &os, bool header)
    {
        if (header)
            os << "model,n_b,sigma_p,sigma_o,misalignment,ese_bps_hz,rss_dbm,n_samples\n";
        for (const auto &r : reports)
            for (const auto &p : r.points)
                os << r.model << ',' << p.n_b << ',' << format_number(r.sigma_p) << ',' << format_number(r.sigma_o) << ','
                   << format_number(p.misalignment) << ',' << format_number(p.ese) << ',' << format_number(p.rss_dbm) << ','
                   << r.n_samples << '\n';
    }

    std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z)
    {
        if (n == 0)
            return {0.0, 1.0};
        const double nn = static_cast<double>(n);
        const double p = static_cast<double>(k) / nn;
        const double z2 = z * z;
        const double center = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
        const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
        return {std::max(0.0, center - half), std::min(1.0, center + half)};
    }
}
