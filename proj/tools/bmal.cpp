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

// bmal: dataset generation, training, evaluation and sweeps for beam alignment

#include "bmal/beam_graph.hpp"
#include "bmal/checkpoint.hpp"
#include "bmal/config.hpp"
#include "bmal/errors.hpp"
#include "bmal/experiment.hpp"
#include "bmal/text.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace
{
    using namespace bmal;

    struct Globals
    {
        std::optional<std::uint64_t> seed;
        std::optional<int> threads;
        bool verbose = false;
    };

    Log logger(const Globals &g) { return g.verbose ? &std::cerr : nullptr; }

    ExperimentConfig config_from(const std::string &path, const Globals &g)
    {
        auto cfg = load_config(path);
        if (g.seed)
            apply_seed_override(cfg, *g.seed);
        if (g.threads)
            cfg.threads = *g.threads;
        return cfg;
    }

    std::ofstream open_out(const std::string &path)
    {
        std::ofstream os(path, std::ios::trunc);
        if (!os)
            throw IoError("cannot write '" + path + "'");
        return os;
    }

    int threads_of(const Globals &g) { return g.threads.value_or(1); }
}

int main(int argc, char **argv)
{
    CLI::App app{"Beam alignment with graph neural networks: data, training and evaluation"};
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Master seed overriding the config seeds");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");

    std::string config, data, out, model_path, model_kind = "gnn", sweep_kind;
    std::vector<int> n_b;
    double sigma_p = 0.0, sigma_o = 0.0;
    bool with_rss = false;
    std::string side = "tx";

    auto *gen = app.add_subcommand("gen", "Generate a labeled dataset");
    gen->add_option("--config", config, "Config file")->required();
    gen->add_option("--out", out, "Dataset file (.bmal)")->required();

    auto *trn = app.add_subcommand("train", "Train a model on a dataset");
    trn->add_option("--config", config, "Config file")->required();
    trn->add_option("--data", data, "Training dataset")->required();
    trn->add_option("--model", model_kind, "gnn or dnn")->check(CLI::IsMember({"gnn", "dnn"}));
    trn->add_option("--out", out, "Checkpoint path")->required();

    auto *evl = app.add_subcommand("eval", "Evaluate a checkpoint");
    evl->add_option("--model", model_path, "Checkpoint path")->required();
    evl->add_option("--data", data, "Test dataset")->required();
    evl->add_option("--nb", n_b, "Candidate-set sizes, comma separated")->delimiter(',');
    evl->add_option("--sigma-p", sigma_p, "Location error std [m]")->check(CLI::NonNegativeNumber);
    evl->add_option("--sigma-o", sigma_o, "Orientation error std [rad]")->check(CLI::NonNegativeNumber);
    evl->add_option("--out", out, "Metrics CSV (stdout when omitted)");

    auto *swp = app.add_subcommand("sweep", "Dataset-size, noise or antenna sweep");
    swp->add_option("--kind", sweep_kind, "size, noise or antenna")->required()->check(CLI::IsMember({"size", "noise", "antenna"}));
    swp->add_option("--config", config, "Config file")->required();
    swp->add_option("--out", out, "Output directory")->required();

    auto *run = app.add_subcommand("run", "Run the stages listed in the config");
    run->add_option("--config", config, "Config file")->required();
    run->add_option("--out", out, "Output directory")->required();

    auto *cpx = app.add_subcommand("complexity", "Multiplication and parameter counts");
    cpx->add_option("--config", config, "Config file")->required();
    cpx->add_option("--out", out, "CSV path (stdout when omitted)");

    auto *exp = app.add_subcommand("export-csv", "Dataset as CSV");
    exp->add_option("--data", data, "Dataset file")->required();
    exp->add_option("--out", out, "CSV path (stdout when omitted)");
    exp->add_flag("--rss", with_rss, "Append every RSS value");

    auto *gph = app.add_subcommand("export-graph", "Beam graph edge list as CSV");
    gph->add_option("--config", config, "Config file")->required();
    gph->add_option("--side", side, "tx or rx")->check(CLI::IsMember({"tx", "rx"}));
    gph->add_option("--out", out, "CSV path (stdout when omitted)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
    }

    try
    {
        const Log log = logger(g);
        auto to_stream = [&](auto &&write)
        {
            if (out.empty())
                write(std::cout);
            else
            {
                auto os = open_out(out);
                write(os);
            }
        };

        if (*gen)
        {
            const auto cfg = config_from(config, g);
            const auto d = generate_dataset(cfg.generation, cfg.n_samples, cfg.data_seed, cfg.threads);
            save(d, out);
            if (log)
                *log << "wrote " << d.size() << " samples to " << out << '\n';
        }
        else if (*trn)
        {
            const auto cfg = config_from(config, g);
            const auto d = load(data);
            if (d.header.scene_hash != scene_hash(cfg.generation))
                throw DimensionError("dataset '" + data + "' was generated with a different scene or array configuration");
            EpochCallback cb;
            if (log)
                cb = [&](int e, double tl, double vl)
                { *log << "epoch " << e << " train " << format_number(tl) << " val " << format_number(vl) << '\n'; };
            auto t = train_model(cfg, d, model_kind, cfg.train.seed, cb);
            save_model(*t.model, t.info, out);
        }
        else if (*evl)
        {
            const auto loaded = load_model(model_path);
            const auto d = load(data);
            if (n_b.empty())
                n_b = {1};
            const auto test = (sigma_p > 0.0 || sigma_o > 0.0) ? perturb_dataset(d, sigma_p, sigma_o, g.seed.value_or(1)) : d;
            auto rep = evaluate(*loaded.model, test, n_b, d.header.params, threads_of(g));
            rep.sigma_p = sigma_p;
            rep.sigma_o = sigma_o;
            to_stream([&](std::ostream &os)
                      { write_metrics_csv({rep}, os); });
        }
        else if (*swp)
        {
            const auto cfg = config_from(config, g);
            const auto manifest = run_sweep(cfg, sweep_kind, out, log);
            if (log)
                *log << "manifest " << manifest << '\n';
        }
        else if (*run)
        {
            const auto cfg = config_from(config, g);
            const auto manifest = run_experiment(cfg, out, log);
            if (log)
                *log << "manifest " << manifest << '\n';
        }
        else if (*cpx)
        {
            const auto cfg = config_from(config, g);
            to_stream([&](std::ostream &os)
                      { write_complexity_csv(cfg, os); });
        }
        else if (*exp)
        {
            const auto d = load(data);
            to_stream([&](std::ostream &os)
                      { export_csv(d, os, with_rss); });
        }
        else if (*gph)
        {
            const auto cfg = config_from(config, g);
            const auto cb = dft_codebook(side == "tx" ? cfg.generation.tx : cfg.generation.rx);
            const auto graph = build_graph(cb, cfg.gnn.in_degree);
            to_stream([&](std::ostream &os)
                      { graph.write_csv(os); });
        }
        return 0;
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    }
    catch (const DataError &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    }
    catch (const NumericError &e)
    {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numeric);
    }
    catch (const InvalidInput &e)
    {
        std::cerr << "invalid input: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::usage);
    }
}
