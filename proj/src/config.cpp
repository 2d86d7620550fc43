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

#include "bmal/config.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

namespace bmal
{
    namespace
    {
        std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

        // Map node with its field path; every key must be consumed
        class Section
        {
        public:
            Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
            {
                if (node_ && !node_.IsNull() && !node_.IsMap())
                    throw ConfigError(path_, "expected a mapping");
            }

            bool has(const std::string &key)
            {
                seen_.insert(key);
                return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
            }

            YAML::Node raw(const std::string &key)
            {
                seen_.insert(key);
                return node_[key];
            }

            std::string path(const std::string &key) const { return join(path_, key); }

            Section sub(const std::string &key)
            {
                return Section(has(key) ? YAML::Node(node_[key]) : YAML::Node(), path(key));
            }

            template <typename T>
            void read(const std::string &key, T &out)
            {
                if (!has(key))
                    return;
                out = scalar<T>(node_[key], path(key));
            }

            template <typename T>
            void read_list(const std::string &key, std::vector<T> &out)
            {
                if (!has(key))
                    return;
                const auto n = node_[key];
                if (!n.IsSequence())
                    throw ConfigError(path(key), "expected a list");
                out.clear();
                for (std::size_t i = 0; i < n.size(); ++i)
                    out.push_back(scalar<T>(n[i], path(key) + "[" + std::to_string(i) + "]"));
            }

            Vec3 vec3(const std::string &key, const Vec3 &fallback)
            {
                std::vector<double> v;
                read_list(key, v);
                if (v.empty())
                    return fallback;
                if (v.size() != 3)
                    throw ConfigError(path(key), "expected three numbers");
                return {v[0], v[1], v[2]};
            }

            AngleRange range(const std::string &key, AngleRange fallback)
            {
                std::vector<double> v;
                read_list(key, v);
                if (v.empty())
                    return fallback;
                if (v.size() != 2 || !(v[0] <= v[1]))
                    throw ConfigError(path(key), "expected [lo, hi] with lo <= hi");
                return {v[0], v[1]};
            }

            void finish() const
            {
                if (!node_ || !node_.IsMap())
                    return;
                for (const auto &kv : node_)
                {
                    const auto key = kv.first.as<std::string>();
                    if (!seen_.count(key))
                        throw ConfigError(path(key), "unknown key");
                }
            }

            template <typename T>
            static T scalar(const YAML::Node &n, const std::string &where)
            {
                if (!n.IsScalar())
                    throw ConfigError(where, "expected a scalar");
                try
                {
                    return n.as<T>();
                }
                catch (const YAML::Exception &)
                {
                    throw ConfigError(where, "cannot parse '" + n.Scalar() + "'");
                }
            }

        private:
            YAML::Node node_;
            std::string path_;
            std::set<std::string> seen_;
        };

        template <typename F>
        void guarded(const std::string &field, F &&check)
        {
            try
            {
                check();
            }
            catch (const InvalidInput &e)
            {
                throw ConfigError(field, e.what());
            }
        }

        ArrayGeometry parse_array(Section s, ArrayGeometry fallback)
        {
            std::string kind = fallback.kind == ArrayKind::ula ? "ula" : "upa";
            s.read("kind", kind);
            ArrayGeometry g;
            if (kind == "ula")
            {
                int n = fallback.kind == ArrayKind::ula ? fallback.size() : 16;
                s.read("n", n);
                g = ArrayGeometry{ArrayKind::ula, n, 1};
            }
            else if (kind == "upa")
            {
                int h = fallback.n_h, v = fallback.n_v;
                s.read("n_h", h);
                s.read("n_v", v);
                g = ArrayGeometry{ArrayKind::upa, h, v};
            }
            else
                throw ConfigError(s.path("kind"), "expected 'ula' or 'upa'");
            s.finish();
            if (g.n_h < 1 || g.n_v < 1)
                throw ConfigError(s.path("n"), "array dimensions must be positive");
            return g;
        }

        Box parse_box(Section s, const Box &fallback)
        {
            Box b = fallback;
            b.min = s.vec3("min", fallback.min);
            b.max = s.vec3("max", fallback.max);
            s.read("name", b.name);
            s.finish();
            if (!(b.min.array() <= b.max.array()).all())
                throw ConfigError(s.path("min"), "box min must not exceed max");
            return b;
        }

        void parse_scene(Section s, Scene &scene)
        {
            std::string preset = "living_room";
            s.read("preset", preset);
            if (preset == "living_room")
                scene = living_room_scene(false);
            else if (preset == "living_room_tilted")
                scene = living_room_scene(true);
            else
                throw ConfigError(s.path("preset"), "expected 'living_room' or 'living_room_tilted'");

            if (s.has("room"))
                scene.room = parse_box(s.sub("room"), scene.room);
            if (s.has("rx_region"))
                scene.rx_region = parse_box(s.sub("rx_region"), scene.rx_region);
            if (s.has("tx"))
            {
                auto t = s.sub("tx");
                scene.tx.position = t.vec3("position", scene.tx.position);
                const Vec3 o = t.vec3("orientation", {scene.tx.orientation.alpha, scene.tx.orientation.beta, scene.tx.orientation.gamma});
                scene.tx.orientation = {o.x(), o.y(), o.z()};
                t.finish();
            }
            if (s.has("rx_orientation"))
            {
                auto o = s.sub("rx_orientation");
                scene.alpha_range = o.range("alpha", scene.alpha_range);
                scene.beta_range = o.range("beta", scene.beta_range);
                scene.gamma_range = o.range("gamma", scene.gamma_range);
                o.finish();
            }
            if (s.has("obstacles"))
            {
                const auto list = s.raw("obstacles");
                if (!list.IsSequence())
                    throw ConfigError(s.path("obstacles"), "expected a list");
                scene.obstacles.clear();
                for (std::size_t i = 0; i < list.size(); ++i)
                {
                    const auto where = s.path("obstacles") + "[" + std::to_string(i) + "]";
                    scene.obstacles.push_back(parse_box(Section(list[i], where), Box{}));
                }
            }
            s.finish();
            guarded(s.path(""), [&]
                    { scene.validate(); });
        }
    }

    ExperimentConfig parse_config(const std::string &text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::Exception &e)
        {
            throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
        }

        ExperimentConfig cfg;
        Section top(root, "");
        auto &gen = cfg.generation;

        parse_scene(top.sub("scene"), gen.scene);

        {
            auto a = top.sub("arrays");
            if (a.has("tx"))
                gen.tx = parse_array(a.sub("tx"), gen.tx);
            if (a.has("rx"))
                gen.rx = parse_array(a.sub("rx"), gen.rx);
            a.finish();
        }
        {
            auto c = top.sub("channel");
            c.read("max_order", gen.trace.max_order);
            c.read("max_paths", gen.trace.max_paths);
            c.read("reflection_loss_db", gen.trace.reflection_loss_db);
            c.read("array_gain", gen.array_gain);
            c.finish();
            if (gen.trace.max_order < 0 || gen.trace.max_order > 2)
                throw ConfigError(c.path("max_order"), "must be 0, 1 or 2");
            if (gen.trace.max_paths < 1)
                throw ConfigError(c.path("max_paths"), "must be positive");
        }
        {
            auto s = top.sub("system");
            double p_t_dbm = watts_to_dbm(gen.params.p_t), noise_dbm = watts_to_dbm(gen.params.sigma_n2);
            double t_fr = gen.params.t_fr, t_s = gen.params.t_s, fc = gen.params.carrier_hz, th = gen.params.snr_th_db;
            s.read("p_t_dbm", p_t_dbm);
            s.read("noise_dbm", noise_dbm);
            s.read("t_fr", t_fr);
            s.read("t_s", t_s);
            s.read("carrier_hz", fc);
            s.read("snr_th_db", th);
            s.finish();
            gen.params = SystemParams::from_dbm(p_t_dbm, noise_dbm, t_fr, t_s, fc, th);
            guarded(s.path(""), [&]
                    { gen.params.validate(); });
            gen.trace.carrier_hz = fc;
        }
        {
            auto d = top.sub("dataset");
            d.read("n_samples", cfg.n_samples);
            d.read("seed", cfg.data_seed);
            d.read("train_fraction", cfg.train_fraction);
            d.read("split_seed", cfg.split_seed);
            d.finish();
            if (cfg.n_samples < 1)
                throw ConfigError(d.path("n_samples"), "must be positive");
            if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
                throw ConfigError(d.path("train_fraction"), "must lie in (0, 1)");
        }
        {
            auto g = top.sub("gnn");
            g.read("feature_dim", cfg.gnn.feature_dim);
            g.read("message_dim", cfg.gnn.message_dim);
            g.read("n_iter", cfg.gnn.n_iter);
            g.read("hidden_layers", cfg.gnn.hidden_layers);
            g.read("hidden_units", cfg.gnn.hidden_units);
            g.read("in_degree", cfg.gnn.in_degree);
            g.finish();
            if (cfg.gnn.feature_dim < 1 || cfg.gnn.message_dim < 1 || cfg.gnn.n_iter < 0 || cfg.gnn.hidden_layers < 0 ||
                cfg.gnn.hidden_units < 1 || cfg.gnn.in_degree < 1)
                throw ConfigError(g.path(""), "hyperparameters must be positive (hidden_layers and n_iter may be 0)");
        }
        {
            auto d = top.sub("dnn");
            d.read("hidden_layers", cfg.dnn.hidden_layers);
            d.read("hidden_units", cfg.dnn.hidden_units);
            d.finish();
            if (cfg.dnn.hidden_layers < 0 || cfg.dnn.hidden_units < 1)
                throw ConfigError(d.path(""), "hyperparameters must be positive (hidden_layers and n_iter may be 0)");
        }
        {
            auto t = top.sub("training");
            t.read("learning_rate", cfg.train.learning_rate);
            t.read("batch_size", cfg.train.batch_size);
            t.read("max_epochs", cfg.train.max_epochs);
            t.read("patience", cfg.train.patience);
            t.read("validation_fraction", cfg.train.validation_fraction);
            t.read("seed", cfg.train.seed);
            t.finish();
            guarded(t.path(""), [&]
                    { cfg.train.validate(); });
        }
        {
            auto e = top.sub("evaluation");
            e.read_list("n_b", cfg.n_b);
            e.read("perturb_seed", cfg.perturb_seed);
            e.finish();
            const int total = gen.tx.size() * gen.rx.size();
            if (cfg.n_b.empty())
                throw ConfigError(e.path("n_b"), "must not be empty");
            for (std::size_t i = 0; i < cfg.n_b.size(); ++i)
                if (cfg.n_b[i] < 1 || cfg.n_b[i] > total)
                    throw ConfigError(e.path("n_b") + "[" + std::to_string(i) + "]",
                                      "must lie in [1, " + std::to_string(total) + "]");
        }
        {
            auto s = top.sub("sweep");
            auto &w = cfg.sweep;
            s.read_list("size_fractions", w.size_fractions);
            s.read_list("models", w.models);
            s.read_list("seeds", w.seeds);
            s.read_list("sigma_p", w.sigma_p);
            s.read_list("sigma_o", w.sigma_o);
            s.read_list("n_t", w.antenna_n_t);
            s.read_list("n_r", w.antenna_n_r);
            s.finish();
            for (const auto &m : w.models)
                if (m != "gnn" && m != "dnn")
                    throw ConfigError(s.path("models"), "unknown model '" + m + "'");
            for (double f : w.size_fractions)
                if (!(f > 0.0 && f <= 1.0))
                    throw ConfigError(s.path("size_fractions"), "fractions must lie in (0, 1]");
            for (double v : w.sigma_p)
                if (!(v >= 0.0))
                    throw ConfigError(s.path("sigma_p"), "must be non-negative");
            for (double v : w.sigma_o)
                if (!(v >= 0.0))
                    throw ConfigError(s.path("sigma_o"), "must be non-negative");
            if (w.seeds.empty())
                throw ConfigError(s.path("seeds"), "must not be empty");
        }
        top.read_list("stages", cfg.stages);
        for (const auto &st : cfg.stages)
        {
            static const std::vector<std::string> known = {"gen", "train", "eval", "sweep_size", "sweep_noise", "sweep_antenna"};
            if (std::find(known.begin(), known.end(), st) == known.end())
                throw ConfigError("stages", "unknown stage '" + st + "'");
        }
        top.read("threads", cfg.threads);
        if (cfg.threads < 1)
            throw ConfigError("threads", "must be positive");
        top.finish();

        io::Fnv1a h;
        h.add_bytes(text.data(), text.size());
        cfg.config_hash = h.value();
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::vector<char> bytes;
        try
        {
            bytes = io::read_file(path);
        }
        catch (const IoError &e)
        {
            throw ConfigError("<file>", e.what());
        }
        return parse_config(std::string(bytes.begin(), bytes.end()));
    }
}
