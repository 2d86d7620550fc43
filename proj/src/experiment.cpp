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

#include "bmal/experiment.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"
#include "bmal/parallel.hpp"
#include "bmal/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace bmal
{
    namespace fs = std::filesystem;

    void apply_seed_override(ExperimentConfig &cfg, std::uint64_t seed)
    {
        cfg.data_seed = seed;
        cfg.split_seed = io::mix_seed(seed, 1);
        cfg.train.seed = io::mix_seed(seed, 2);
        cfg.perturb_seed = io::mix_seed(seed, 3);
    }

    ModelShape model_shape(const ExperimentConfig &cfg, const GenerationConfig &gen, const std::string &kind)
    {
        ModelShape s;
        s.kind = kind;
        s.tx = gen.tx;
        s.rx = gen.rx;
        s.mode = gen.input_mode();
        s.gnn = cfg.gnn;
        s.dnn = cfg.dnn;
        s.rx_region = gen.scene.rx_region;
        return s;
    }

    namespace
    {
        TrainedModel train_with(const ExperimentConfig &cfg, const GenerationConfig &gen, const Dataset &train_set,
                                const std::string &kind, std::uint64_t seed, const EpochCallback &on_epoch)
        {
            TrainedModel t;
            t.info.shape = model_shape(cfg, gen, kind);
            t.info.shape.rx_region = train_set.header.rx_region;
            t.info.train = cfg.train;
            t.info.train.seed = seed;
            t.info.seed = seed;
            t.info.scene_hash = train_set.header.scene_hash;
            t.model = make_model(t.info.shape, seed);
            t.result = train(*t.model, train_set, t.info.train, on_epoch);
            t.info.epochs_run = t.result.epochs_run;
            t.info.best_epoch = t.result.best_epoch;
            return t;
        }

        // Mean over repeated runs of the same configuration; RSS is averaged in watts
        EvalReport average(const std::vector<EvalReport> &runs)
        {
            EvalReport out = runs.front();
            for (std::size_t j = 0; j < out.points.size(); ++j)
            {
                double mis = 0.0, e = 0.0, w = 0.0, am = 0.0;
                std::size_t count = 0, lost = 0;
                for (const auto &r : runs)
                {
                    mis += r.points[j].misalignment;
                    e += r.points[j].ese;
                    w += dbm_to_watts(r.points[j].rss_dbm);
                    am += r.points[j].argmax_misalignment;
                    count += r.points[j].misaligned;
                    lost += r.points[j].undetected;
                }
                const double n = static_cast<double>(runs.size());
                out.points[j].misalignment = mis / n;
                out.points[j].ese = e / n;
                out.points[j].rss_dbm = watts_to_dbm(w / n);
                out.points[j].argmax_misalignment = am / n;
                out.points[j].misaligned = count;
                out.points[j].undetected = lost;
            }
            return out;
        }

        std::string hex(std::uint64_t v)
        {
            char buf[17];
            auto r = std::to_chars(buf, buf + 16, v, 16);
            std::string s(buf, r.ptr);
            return std::string(16 - s.size(), '0') + s;
        }

        void say(Log log, const std::string &msg)
        {
            if (log)
                *log << msg << '\n';
        }

        ArrayGeometry resized(const ArrayGeometry &like, int n, const std::string &field)
        {
            if (n < 1)
                throw ConfigError(field, "array sizes must be positive");
            if (like.kind == ArrayKind::ula)
                return ArrayGeometry::ula(n);
            const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
            if (s * s != n)
                throw ConfigError(field, "planar arrays need a square element count, got " + std::to_string(n));
            return ArrayGeometry::upa(s, s);
        }

        std::vector<int> feasible_n_b(const std::vector<int> &n_b, int total)
        {
            std::vector<int> out;
            for (int v : n_b)
                if (v <= total)
                    out.push_back(v);
            if (out.empty())
                out.push_back(1);
            return out;
        }
    }

    TrainedModel train_model(const ExperimentConfig &cfg, const Dataset &train_set, const std::string &kind,
                             std::uint64_t seed, const EpochCallback &on_epoch)
    {
        return train_with(cfg, cfg.generation, train_set, kind, seed, on_epoch);
    }

    std::vector<EvalReport> sweep_size(const ExperimentConfig &cfg, const Dataset &train_set, const Dataset &test_set, Log log)
    {
        const auto &w = cfg.sweep;
        struct Job
        {
            std::size_t seed_idx, frac_idx, model_idx;
        };
        std::vector<Job> jobs;
        for (std::size_t s = 0; s < w.seeds.size(); ++s)
            for (std::size_t f = 0; f < w.size_fractions.size(); ++f)
                for (std::size_t m = 0; m < w.models.size(); ++m)
                    jobs.push_back({s, f, m});

        std::vector<EvalReport> results(jobs.size());
        std::vector<std::string> notes(jobs.size());
        parallel_for(jobs.size(), cfg.threads, [&](std::size_t k)
                     {
            const auto &j = jobs[k];
            const std::uint64_t seed = w.seeds[j.seed_idx];
            // Nested subsets: every fraction is a prefix of the same permutation
            std::vector<std::size_t> order(train_set.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::mt19937_64 rng(io::mix_seed(seed, 0x5173));
            std::shuffle(order.begin(), order.end(), rng);
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(w.size_fractions[j.frac_idx] * static_cast<double>(order.size()))));
            order.resize(keep);
            const auto subset = train_set.subset(order);
            auto t = train_with(cfg, cfg.generation, subset, w.models[j.model_idx], seed, {});
            results[k] = evaluate(*t.model, test_set, cfg.n_b, cfg.generation.params, 1);
            results[k].model = w.models[j.model_idx] + "_frac" + format_number(w.size_fractions[j.frac_idx]);
            notes[k] = "size sweep: " + results[k].model + " seed " + std::to_string(seed) + " trained on " +
                       std::to_string(keep) + " samples, " + std::to_string(t.result.epochs_run) + " epochs"; });

        for (const auto &n : notes)
            say(log, n);

        std::vector<EvalReport> out;
        for (std::size_t f = 0; f < w.size_fractions.size(); ++f)
            for (std::size_t m = 0; m < w.models.size(); ++m)
            {
                std::vector<EvalReport> runs;
                for (std::size_t k = 0; k < jobs.size(); ++k)
                    if (jobs[k].frac_idx == f && jobs[k].model_idx == m)
                        runs.push_back(results[k]);
                out.push_back(average(runs));
            }
        return out;
    }

    std::vector<EvalReport> sweep_noise(const ExperimentConfig &cfg, const Dataset &train_set, const Dataset &test_set, Log log)
    {
        const auto &w = cfg.sweep;
        std::vector<std::pair<double, double>> grid;
        for (double sp : w.sigma_p)
            grid.emplace_back(sp, 0.0);
        for (double so : w.sigma_o)
            if (so != 0.0 || w.sigma_p.empty())
                grid.emplace_back(0.0, so);

        std::vector<TrainedModel> models(w.models.size());
        parallel_for(models.size(), cfg.threads, [&](std::size_t m)
                     { models[m] = train_with(cfg, cfg.generation, train_set, w.models[m], cfg.train.seed, {}); });
        for (std::size_t m = 0; m < models.size(); ++m)
            say(log, "noise sweep: trained " + w.models[m] + ", " + std::to_string(models[m].result.epochs_run) + " epochs");

        // One job per (model, sigma pair, perturbation seed)
        const std::size_t n_seeds = w.seeds.size();
        const std::size_t n_jobs = models.size() * grid.size() * n_seeds;
        std::vector<EvalReport> results(n_jobs);
        parallel_for(n_jobs, cfg.threads, [&](std::size_t k)
                     {
            const std::size_t s = k % n_seeds, g = (k / n_seeds) % grid.size(), m = k / (n_seeds * grid.size());
            const auto [sp, so] = grid[g];
            const auto seed = io::mix_seed(cfg.perturb_seed, w.seeds[s]);
            results[k] = evaluate(*models[m].model, perturb_dataset(test_set, sp, so, seed), cfg.n_b, cfg.generation.params, 1);
            results[k].sigma_p = sp;
            results[k].sigma_o = so; });

        std::vector<EvalReport> out;
        for (std::size_t k = 0; k < n_jobs; k += n_seeds)
            out.push_back(average({results.begin() + static_cast<std::ptrdiff_t>(k), results.begin() + static_cast<std::ptrdiff_t>(k + n_seeds)}));
        return out;
    }

    std::vector<EvalReport> sweep_antenna(const ExperimentConfig &cfg, Log log)
    {
        const auto &w = cfg.sweep;
        std::vector<GenerationConfig> gens;
        for (int n : w.antenna_n_t)
        {
            auto g = cfg.generation;
            g.tx = resized(g.tx, n, "sweep.n_t");
            gens.push_back(g);
        }
        for (int n : w.antenna_n_r)
        {
            auto g = cfg.generation;
            g.rx = resized(g.rx, n, "sweep.n_r");
            gens.push_back(g);
        }

        std::vector<EvalReport> out;
        for (const auto &g : gens)
        {
            const auto data = generate_dataset(g, cfg.n_samples, cfg.data_seed, cfg.threads);
            const auto [train_set, test_set] = split(data, cfg.train_fraction, cfg.split_seed);
            const auto n_b = feasible_n_b(cfg.n_b, g.tx.size() * g.rx.size());
            const std::string suffix = "_nt" + std::to_string(g.tx.size()) + "_nr" + std::to_string(g.rx.size());

            std::vector<EvalReport> results(w.models.size() * w.seeds.size());
            parallel_for(results.size(), cfg.threads, [&](std::size_t k)
                         {
                const auto &kind = w.models[k / w.seeds.size()];
                auto t = train_with(cfg, g, train_set, kind, w.seeds[k % w.seeds.size()], {});
                results[k] = evaluate(*t.model, test_set, n_b, g.params, 1); });

            for (std::size_t m = 0; m < w.models.size(); ++m)
            {
                const auto first = results.begin() + static_cast<std::ptrdiff_t>(m * w.seeds.size());
                auto rep = average({first, first + static_cast<std::ptrdiff_t>(w.seeds.size())});
                rep.model = w.models[m] + suffix;
                say(log, "antenna sweep: " + rep.model + " top-1 misalignment " + format_number(rep.points.front().misalignment));
                out.push_back(std::move(rep));
            }
        }
        return out;
    }

    namespace
    {
        std::string escape_xml(const std::string &s)
        {
            std::string out;
            for (char c : s)
            {
                switch (c)
                {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
                }
            }
            return out;
        }

        std::string fixed(double v, int digits = 2)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", digits, v);
            return buf;
        }

        std::string short_number(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.4g", v);
            return buf;
        }
    }

    void write_svg_chart(std::ostream &os, const std::string &title, const std::string &x_label,
                         const std::string &y_label, const std::vector<Series> &series)
    {
        constexpr double width = 720, height = 440, left = 70, right = 200, top = 40, bottom = 50;
        const double pw = width - left - right, ph = height - top - bottom;
        static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (const auto &s : series)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                {
                    x0 = std::min(x0, s.x[i]);
                    x1 = std::max(x1, s.x[i]);
                    y0 = std::min(y0, s.y[i]);
                    y1 = std::max(y1, s.y[i]);
                }
        if (!std::isfinite(x0))
            x0 = 0, x1 = 1, y0 = 0, y1 = 1;
        if (x1 == x0)
            x1 = x0 + 1;
        if (y1 == y0)
            y1 = y0 + 1;
        auto px = [&](double x)
        { return left + (x - x0) / (x1 - x0) * pw; };
        auto py = [&](double y)
        { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
           << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
        os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t)
        {
            const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
            os << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << fixed(top + ph + 18) << "\" text-anchor=\"middle\">" << short_number(fx) << "</text>\n";
            os << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(py(fy) + 4) << "\" text-anchor=\"end\">" << short_number(fy) << "</text>\n";
            os << "<line x1=\"" << left << "\" y1=\"" << fixed(py(fy)) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(py(fy))
               << "\" stroke=\"#dddddd\"/>\n";
        }
        os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 10) << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
        os << "<text transform=\"translate(18," << fixed(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

        for (std::size_t k = 0; k < series.size(); ++k)
        {
            const auto &s = series[k];
            const char *color = palette[k % std::size(palette)];
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i)
            {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                    continue;
                os << (first ? "" : " ") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
                first = false;
            }
            os << "\"/>\n";
            const double ly = top + 14 + 18.0 * static_cast<double>(k);
            os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << fixed(ly - 4)
               << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << left + pw + 38 << "\" y=\"" << fixed(ly) << "\">" << escape_xml(s.name) << "</text>\n";
        }
        os << "</svg>\n";
    }

    std::vector<std::string> write_metric_charts(const std::vector<EvalReport> &reports, const std::string &stem,
                                                 const std::string &x_axis)
    {
        struct Metric
        {
            const char *key, *label;
            double (*get)(const EvalPoint &);
        };
        static const Metric metrics[] = {
            {"misalignment", "misalignment probability", [](const EvalPoint &p)
             { return p.misalignment; }},
            {"ese", "ESE [bits/s/Hz]", [](const EvalPoint &p)
             { return p.ese; }},
            {"rss", "RSS [dBm]", [](const EvalPoint &p)
             { return p.rss_dbm; }},
        };

        std::vector<std::string> written;
        for (const auto &m : metrics)
        {
            std::vector<Series> series;
            if (x_axis == "n_b")
            {
                for (const auto &r : reports)
                {
                    Series s;
                    s.name = r.model;
                    if (r.sigma_p != 0.0 || r.sigma_o != 0.0)
                        s.name += " sp=" + format_number(r.sigma_p) + " so=" + format_number(r.sigma_o);
                    for (const auto &p : r.points)
                    {
                        s.x.push_back(p.n_b);
                        s.y.push_back(m.get(p));
                    }
                    series.push_back(std::move(s));
                }
            }
            else if (x_axis == "sigma_p" || x_axis == "sigma_o")
            {
                const bool along_p = x_axis == "sigma_p";
                std::map<std::pair<std::string, int>, Series> by_key;
                std::vector<std::pair<std::string, int>> key_order;
                for (const auto &r : reports)
                {
                    if ((along_p ? r.sigma_o : r.sigma_p) != 0.0)
                        continue;
                    for (const auto &p : r.points)
                    {
                        const auto key = std::make_pair(r.model, p.n_b);
                        if (!by_key.count(key))
                        {
                            key_order.push_back(key);
                            by_key[key].name = r.model + " N_b=" + std::to_string(p.n_b);
                        }
                        by_key[key].x.push_back(along_p ? r.sigma_p : r.sigma_o);
                        by_key[key].y.push_back(m.get(p));
                    }
                }
                for (const auto &k : key_order)
                    series.push_back(by_key[k]);
            }
            else
                throw InvalidInput("unknown chart axis '" + x_axis + "'");

            const std::string path = stem + "_" + m.key + ".svg";
            std::ofstream os(path, std::ios::trunc);
            if (!os)
                throw IoError("cannot write '" + path + "'");
            const std::string x_label = x_axis == "n_b" ? "N_b" : x_axis == "sigma_p" ? "sigma_p [m]" : "sigma_o [rad]";
            write_svg_chart(os, fs::path(stem).filename().string() + ": " + m.key, x_label, m.label, series);
            written.push_back(path);
        }
        return written;
    }

    void write_complexity_csv(const ExperimentConfig &cfg, std::ostream &os)
    {
        const std::int64_t n_t = cfg.generation.tx.size(), n_r = cfg.generation.rx.size();
        const auto &g = cfg.gnn;
        const auto &d = cfg.dnn;
        os << "method,multiplications,parameters\n";
        os << "gnn," << count_gnn_multiplications(n_t, n_r, g.feature_dim, g.message_dim, g.n_iter, g.hidden_layers, g.hidden_units)
           << ',' << count_gnn_parameters(g.feature_dim, g.message_dim, g.hidden_layers, g.hidden_units) << '\n';
        os << "dnn," << count_dnn_multiplications(n_t, n_r, d.hidden_layers, d.hidden_units)
           << ',' << count_dnn_parameters(n_t, n_r, d.hidden_layers, d.hidden_units) << '\n';
    }

    namespace
    {
        void write_text(const std::string &path, const std::string &text)
        {
            io::write_file(path, std::vector<char>(text.begin(), text.end()));
        }

        std::string metrics_csv(const std::vector<EvalReport> &reports)
        {
            std::ostringstream os;
            write_metrics_csv(reports, os);
            return os.str();
        }

        std::string loss_csv(const TrainResult &r)
        {
            std::ostringstream os;
            os << "epoch,train_loss,val_loss\n";
            for (std::size_t e = 0; e < r.train_loss.size(); ++e)
                os << e << ',' << format_number(r.train_loss[e]) << ',' << format_number(r.val_loss[e]) << '\n';
            return os.str();
        }
    }

    std::string run_experiment(const ExperimentConfig &cfg, const std::string &out_dir, Log log)
    {
        std::error_code ec;
        fs::create_directories(fs::path(out_dir) / "models", ec);
        if (ec)
            throw IoError("cannot create '" + out_dir + "': " + ec.message());
        const auto dir = fs::path(out_dir);
        std::vector<std::string> files;
        auto rel = [&](const fs::path &p)
        { return fs::relative(p, dir).generic_string(); };

        std::unique_ptr<Dataset> train_set, test_set;
        auto ensure_data = [&]
        {
            if (train_set)
                return;
            say(log, "generating " + std::to_string(cfg.n_samples) + " samples");
            const auto data = generate_dataset(cfg.generation, cfg.n_samples, cfg.data_seed, cfg.threads);
            auto [a, b] = split(data, cfg.train_fraction, cfg.split_seed);
            train_set = std::make_unique<Dataset>(std::move(a));
            test_set = std::make_unique<Dataset>(std::move(b));
            if (std::find(cfg.stages.begin(), cfg.stages.end(), "gen") != cfg.stages.end())
            {
                save(data, (dir / "dataset.bmal").string());
                files.push_back("dataset.bmal");
            }
        };

        std::vector<TrainedModel> trained;
        auto ensure_models = [&]
        {
            if (!trained.empty())
                return;
            ensure_data();
            trained.resize(cfg.sweep.models.size());
            parallel_for(trained.size(), cfg.threads, [&](std::size_t m)
                         { trained[m] = train_model(cfg, *train_set, cfg.sweep.models[m], cfg.train.seed); });
            for (const auto &t : trained)
            {
                const auto kind = t.model->kind();
                const auto path = dir / "models" / (kind + ".bmnn");
                save_model(*t.model, t.info, path.string());
                write_text((dir / "models" / (kind + "_loss.csv")).string(), loss_csv(t.result));
                files.push_back(rel(path));
                files.push_back(rel(path) + ".json");
                files.push_back("models/" + kind + "_loss.csv");
                say(log, "trained " + kind + ": " + std::to_string(t.result.epochs_run) + " epochs, best epoch " +
                             std::to_string(t.result.best_epoch));
            }
        };

        auto emit = [&](const std::string &name, const std::vector<EvalReport> &reports, const std::vector<std::string> &axes)
        {
            write_text((dir / (name + ".csv")).string(), metrics_csv(reports));
            files.push_back(name + ".csv");
            for (const auto &axis : axes)
            {
                const auto stem = (dir / (axes.size() > 1 ? name + "_" + axis : name)).string();
                for (const auto &p : write_metric_charts(reports, stem, axis))
                    files.push_back(rel(p));
            }
        };

        for (const auto &stage : cfg.stages)
        {
            say(log, "stage " + stage);
            if (stage == "gen")
                ensure_data();
            else if (stage == "train")
                ensure_models();
            else if (stage == "eval")
            {
                ensure_models();
                std::vector<EvalReport> reports;
                for (const auto &t : trained)
                    reports.push_back(evaluate(*t.model, *test_set, cfg.n_b, cfg.generation.params, cfg.threads));
                emit("metrics", reports, {"n_b"});
            }
            else if (stage == "sweep_size")
            {
                ensure_data();
                emit("sweep_size", sweep_size(cfg, *train_set, *test_set, log), {"n_b"});
            }
            else if (stage == "sweep_noise")
            {
                ensure_data();
                emit("sweep_noise", sweep_noise(cfg, *train_set, *test_set, log), {"sigma_p", "sigma_o"});
            }
            else if (stage == "sweep_antenna")
                emit("sweep_antenna", sweep_antenna(cfg, log), {"n_b"});
            else
                throw ConfigError("stages", "unknown stage '" + stage + "'");
        }

        {
            std::ostringstream os;
            write_complexity_csv(cfg, os);
            write_text((dir / "complexity.csv").string(), os.str());
            files.push_back("complexity.csv");
        }

        nlohmann::json manifest;
        manifest["tool"] = "bmal";
        manifest["version"] = bmal_version;
        manifest["dataset_format_version"] = dataset_format_version;
        manifest["config_hash"] = hex(cfg.config_hash);
        manifest["scene_hash"] = hex(scene_hash(cfg.generation));
        manifest["seeds"] = {{"data", cfg.data_seed}, {"split", cfg.split_seed}, {"train", cfg.train.seed},
                             {"perturb", cfg.perturb_seed}, {"sweep", cfg.sweep.seeds}};
        manifest["stages"] = cfg.stages;
        manifest["compiler"] = __VERSION__;
        nlohmann::json listing = nlohmann::json::array();
        for (const auto &f : files)
        {
            const auto bytes = io::read_file((dir / f).string());
            io::Fnv1a h;
            h.add_bytes(bytes.data(), bytes.size());
            listing.push_back({{"path", f}, {"bytes", bytes.size()}, {"fnv1a", hex(h.value())}});
        }
        manifest["files"] = listing;
        const auto path = (dir / "manifest.json").string();
        write_text(path, manifest.dump(2) + "\n");
        return path;
    }

    std::string run_sweep(const ExperimentConfig &cfg, const std::string &kind, const std::string &out_dir, Log log)
    {
        if (kind != "size" && kind != "noise" && kind != "antenna")
            throw ConfigError("sweep.kind", "expected size, noise or antenna, got '" + kind + "'");
        auto c = cfg;
        c.stages = {"sweep_" + kind};
        return run_experiment(c, out_dir, log);
    }
}
