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

#include "bmal/checkpoint.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace bmal
{
    using nlohmann::json;

    std::unique_ptr<BeamModel> make_model(const ModelShape &shape, std::uint64_t seed)
    {
        if (shape.kind == "gnn")
        {
            auto m = std::make_unique<GnnPairModel>(dft_codebook(shape.tx), dft_codebook(shape.rx), shape.mode, shape.gnn);
            m->init_glorot(seed);
            return m;
        }
        if (shape.kind == "dnn")
        {
            auto m = std::make_unique<DnnModel>(shape.tx.size(), shape.rx.size(), shape.mode, shape.dnn);
            m->init_glorot(seed);
            return m;
        }
        throw InvalidInput("unknown model kind '" + shape.kind + "'");
    }

    namespace
    {
        json geometry_json(const ArrayGeometry &g)
        {
            return {{"kind", g.kind == ArrayKind::ula ? "ula" : "upa"}, {"n_h", g.n_h}, {"n_v", g.n_v}};
        }

        ArrayGeometry geometry_from(const json &j)
        {
            ArrayGeometry g;
            g.kind = j.at("kind").get<std::string>() == "upa" ? ArrayKind::upa : ArrayKind::ula;
            g.n_h = j.at("n_h").get<int>();
            g.n_v = j.at("n_v").get<int>();
            g.validate();
            return g;
        }

        json vec_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

        Vec3 vec_from(const json &j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
    }

    void save_model(const BeamModel &model, const CheckpointInfo &info, const std::string &path)
    {
        const auto params = model.parameters();
        nn::save_parameters(path, params);

        const auto &s = info.shape;
        json meta;
        meta["format"] = "bmal-model";
        meta["version"] = 1;
        meta["kind"] = model.kind();
        meta["tx"] = geometry_json(s.tx);
        meta["rx"] = geometry_json(s.rx);
        meta["input_mode"] = s.mode == InputMode::azimuth_only ? "azimuth_only" : "full_orientation";
        meta["gnn"] = {{"feature_dim", s.gnn.feature_dim}, {"message_dim", s.gnn.message_dim}, {"n_iter", s.gnn.n_iter},
                       {"hidden_layers", s.gnn.hidden_layers}, {"hidden_units", s.gnn.hidden_units}, {"in_degree", s.gnn.in_degree}};
        meta["dnn"] = {{"hidden_layers", s.dnn.hidden_layers}, {"hidden_units", s.dnn.hidden_units}};
        meta["rx_region"] = {{"min", vec_json(s.rx_region.min)}, {"max", vec_json(s.rx_region.max)}};
        meta["training"] = {{"learning_rate", info.train.learning_rate}, {"batch_size", info.train.batch_size},
                            {"max_epochs", info.train.max_epochs}, {"patience", info.train.patience},
                            {"validation_fraction", info.train.validation_fraction},
                            {"epochs_run", info.epochs_run}, {"best_epoch", info.best_epoch}};
        meta["seed"] = info.seed;
        meta["scene_hash"] = info.scene_hash;
        meta["parameter_count"] = model.parameter_count();

        std::ofstream os(path + ".json", std::ios::trunc);
        if (!os)
            throw IoError("cannot write checkpoint metadata '" + path + ".json'");
        os << meta.dump(2) << '\n';
    }

    LoadedModel load_model(const std::string &path)
    {
        const auto text = io::read_file(path + ".json");
        json meta;
        try
        {
            meta = json::parse(text.begin(), text.end());
        }
        catch (const json::exception &e)
        {
            throw FormatError("checkpoint metadata '" + path + ".json' is not valid JSON: " + e.what());
        }

        LoadedModel out;
        try
        {
            if (meta.at("format").get<std::string>() != "bmal-model" || meta.at("version").get<int>() != 1)
                throw FormatError("unsupported checkpoint metadata format");
            auto &s = out.info.shape;
            s.kind = meta.at("kind").get<std::string>();
            s.tx = geometry_from(meta.at("tx"));
            s.rx = geometry_from(meta.at("rx"));
            s.mode = meta.at("input_mode").get<std::string>() == "full_orientation" ? InputMode::full_orientation : InputMode::azimuth_only;
            const auto &g = meta.at("gnn");
            s.gnn = {g.at("feature_dim").get<int>(), g.at("message_dim").get<int>(), g.at("n_iter").get<int>(),
                     g.at("hidden_layers").get<int>(), g.at("hidden_units").get<int>(), g.at("in_degree").get<int>()};
            const auto &d = meta.at("dnn");
            s.dnn = {d.at("hidden_layers").get<int>(), d.at("hidden_units").get<int>()};
            s.rx_region.min = vec_from(meta.at("rx_region").at("min"));
            s.rx_region.max = vec_from(meta.at("rx_region").at("max"));
            const auto &t = meta.at("training");
            out.info.train.learning_rate = t.at("learning_rate").get<double>();
            out.info.train.batch_size = t.at("batch_size").get<int>();
            out.info.train.max_epochs = t.at("max_epochs").get<int>();
            out.info.train.patience = t.at("patience").get<int>();
            out.info.train.validation_fraction = t.at("validation_fraction").get<double>();
            out.info.epochs_run = t.at("epochs_run").get<int>();
            out.info.best_epoch = t.at("best_epoch").get<int>();
            out.info.seed = meta.at("seed").get<std::uint64_t>();
            out.info.scene_hash = meta.at("scene_hash").get<std::uint64_t>();
        }
        catch (const json::exception &e)
        {
            throw FormatError("checkpoint metadata '" + path + ".json' is missing fields: " + e.what());
        }

        out.model = make_model(out.info.shape, out.info.seed);
        auto params = out.model->parameters();
        nn::load_parameters(path, params);
        return out;
    }
}
