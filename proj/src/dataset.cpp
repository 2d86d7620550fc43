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

#include "bmal/dataset.hpp"
#include "bmal/binary_io.hpp"
#include "bmal/errors.hpp"
#include "bmal/parallel.hpp"
#include "bmal/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace bmal
{
    InputMode GenerationConfig::input_mode() const
    {
        return scene.planar_orientation() ? InputMode::azimuth_only : InputMode::full_orientation;
    }

    std::uint64_t scene_hash(const GenerationConfig &cfg)
    {
        io::Fnv1a h;
        auto add_vec = [&](const Vec3 &v)
        {
            for (int k = 0; k < 3; ++k)
                h.add(v[k]);
        };
        auto add_box = [&](const Box &b)
        {
            add_vec(b.min);
            add_vec(b.max);
        };
        const auto &s = cfg.scene;
        add_box(s.room);
        h.add(static_cast<std::uint64_t>(s.obstacles.size()));
        for (const auto &ob : s.obstacles)
            add_box(ob);
        add_vec(s.tx.position);
        h.add(s.tx.orientation.alpha);
        h.add(s.tx.orientation.beta);
        h.add(s.tx.orientation.gamma);
        add_box(s.rx_region);
        for (const auto *r : {&s.alpha_range, &s.beta_range, &s.gamma_range})
        {
            h.add(r->lo);
            h.add(r->hi);
        }
        for (const auto *g : {&cfg.tx, &cfg.rx})
        {
            h.add(static_cast<std::uint32_t>(g->kind));
            h.add(static_cast<std::uint32_t>(g->n_h));
            h.add(static_cast<std::uint32_t>(g->n_v));
        }
        const auto &p = cfg.params;
        for (double v : {p.p_t, p.sigma_n2, p.t_fr, p.t_s, p.carrier_hz, p.snr_th_db})
            h.add(v);
        h.add(static_cast<std::int32_t>(cfg.trace.max_order));
        h.add(static_cast<std::int32_t>(cfg.trace.max_paths));
        h.add(cfg.trace.reflection_loss_db);
        h.add(static_cast<std::uint8_t>(cfg.array_gain));
        return h.value();
    }

    Dataset Dataset::subset(const std::vector<std::size_t> &indices) const
    {
        Dataset d;
        d.header = header;
        d.samples.reserve(indices.size());
        for (auto i : indices)
            d.samples.push_back(samples.at(i));
        return d;
    }

    Eigen::MatrixXd simulate_rss(const GenerationConfig &cfg, const Pose &rx_pose)
    {
        TraceOptions opt = cfg.trace;
        opt.carrier_hz = cfg.params.carrier_hz;
        const auto paths = trace_paths(cfg.scene, cfg.scene.tx, rx_pose, opt);
        const CMat h = channel_matrix(paths, cfg.tx, cfg.rx, cfg.array_gain);
        return rss_matrix(h, dft_codebook(cfg.tx), dft_codebook(cfg.rx), cfg.params);
    }

    BeamPair label(const Eigen::MatrixXd &rss)
    {
        if (rss.size() == 0)
            throw InvalidInput("label: empty RSS matrix");
        BeamPair best{0, 0};
        double best_v = rss(0, 0);
        for (int p = 0; p < rss.rows(); ++p)
            for (int q = 0; q < rss.cols(); ++q)
                if (rss(p, q) > best_v)
                {
                    best_v = rss(p, q);
                    best = {p, q};
                }
        return best;
    }

    Dataset generate_dataset(const GenerationConfig &cfg, std::size_t n_samples, std::uint64_t master_seed, int threads)
    {
        if (n_samples < 1)
            throw InvalidInput("generate_dataset: need at least one sample");
        cfg.scene.validate();
        cfg.params.validate();
        cfg.tx.validate();
        cfg.rx.validate();

        Dataset d;
        d.header.tx = cfg.tx;
        d.header.rx = cfg.rx;
        d.header.params = cfg.params;
        d.header.rx_region = cfg.scene.rx_region;
        d.header.full_orientation = cfg.input_mode() == InputMode::full_orientation;
        d.header.scene_hash = scene_hash(cfg);
        d.header.seed = master_seed;
        d.samples.resize(n_samples);

        const Codebook tx_cb = dft_codebook(cfg.tx);
        const Codebook rx_cb = dft_codebook(cfg.rx);
        TraceOptions opt = cfg.trace;
        opt.carrier_hz = cfg.params.carrier_hz;

        constexpr int max_attempts = 1000;
        parallel_for(n_samples, threads, [&](std::size_t i)
                     {
            const std::uint64_t seed = io::mix_seed(master_seed, i);
            Pose pose = sample_rx_pose(cfg.scene, seed);
            for (int attempt = 1; cfg.scene.inside_obstacle(pose.position); ++attempt)
            {
                if (attempt >= max_attempts)
                    throw InvalidInput("generate_dataset: service area is covered by obstacles");
                pose = sample_rx_pose(cfg.scene, io::mix_seed(seed, static_cast<std::uint64_t>(attempt)));
            }
            const auto paths = trace_paths(cfg.scene, cfg.scene.tx, pose, opt);
            const CMat h = channel_matrix(paths, cfg.tx, cfg.rx, cfg.array_gain);
            const Eigen::MatrixXd r = rss_matrix(h, tx_cb, rx_cb, cfg.params);

            Sample &s = d.samples[i];
            s.location = pose.position;
            s.orientation = pose.orientation;
            s.label = label(r);
            s.rss.resize(static_cast<std::size_t>(r.size()));
            for (int p = 0; p < r.rows(); ++p)
                for (int q = 0; q < r.cols(); ++q)
                    s.rss[static_cast<std::size_t>(p) * r.cols() + q] = static_cast<float>(r(p, q)); });
        return d;
    }

    Sample perturb(const Sample &s, double sigma_p, double sigma_o, bool tilt, std::mt19937_64 &rng)
    {
        if (sigma_p < 0.0 || sigma_o < 0.0)
            throw InvalidInput("perturb: standard deviations must be non-negative");
        std::normal_distribution<double> gauss(0.0, 1.0);
        Sample out = s;
        for (int k = 0; k < 3; ++k)
            out.location[k] += sigma_p * gauss(rng);
        out.orientation.alpha = wrap_two_pi(out.orientation.alpha + sigma_o * gauss(rng));
        if (tilt)
        {
            const double lo = -pi / 4.0, hi = std::nextafter(pi / 4.0, 0.0);
            out.orientation.beta = std::clamp(out.orientation.beta + sigma_o * gauss(rng), lo, hi);
            out.orientation.gamma = std::clamp(out.orientation.gamma + sigma_o * gauss(rng), lo, hi);
        }
        return out;
    }

    std::pair<Dataset, Dataset> split(const Dataset &d, double train_fraction, std::uint64_t seed)
    {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw InvalidInput("split: fraction must lie in (0, 1)");
        std::vector<std::size_t> idx(d.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.size())));
        std::vector<std::size_t> a(idx.begin(), idx.begin() + n_train), b(idx.begin() + n_train, idx.end());
        return {d.subset(a), d.subset(b)};
    }

    // ---------- persistence ----------

    namespace
    {
        constexpr char magic[] = "BMAL";

        void put_geometry(io::ByteWriter &w, const ArrayGeometry &g)
        {
            w.put<std::uint8_t>(static_cast<std::uint8_t>(g.kind));
            w.put<std::uint32_t>(static_cast<std::uint32_t>(g.n_h));
            w.put<std::uint32_t>(static_cast<std::uint32_t>(g.n_v));
        }

        ArrayGeometry get_geometry(io::ByteReader &r)
        {
            const auto kind = r.get<std::uint8_t>("array kind");
            const auto n_h = r.get<std::uint32_t>("array size");
            const auto n_v = r.get<std::uint32_t>("array size");
            if (kind > 1)
                throw FormatError("unknown array kind " + std::to_string(kind));
            if (n_h < 1 || n_v < 1 || n_h > 4096 || n_v > 4096 || (kind == 0 && n_v != 1))
                throw DimensionError("invalid array dimensions " + std::to_string(n_h) + "x" + std::to_string(n_v));
            return {static_cast<ArrayKind>(kind), static_cast<int>(n_h), static_cast<int>(n_v)};
        }

        std::size_t record_bytes(const DatasetHeader &h)
        {
            return 6 * 8 + 2 * 4 + static_cast<std::size_t>(h.tx.size()) * h.rx.size() * 4;
        }
    }

    std::vector<char> serialize(const Dataset &d)
    {
        io::ByteWriter w;
        w.put_bytes(std::string_view(magic, 4));
        w.put<std::uint32_t>(dataset_format_version);
        const auto &h = d.header;
        put_geometry(w, h.tx);
        put_geometry(w, h.rx);
        for (double v : {h.params.p_t, h.params.sigma_n2, h.params.t_fr, h.params.t_s, h.params.carrier_hz, h.params.snr_th_db})
            w.put<double>(v);
        for (int k = 0; k < 3; ++k)
            w.put<double>(h.rx_region.min[k]);
        for (int k = 0; k < 3; ++k)
            w.put<double>(h.rx_region.max[k]);
        w.put<std::uint8_t>(h.full_orientation ? 1 : 0);
        w.put<std::uint64_t>(h.scene_hash);
        w.put<std::uint64_t>(h.seed);
        w.put<std::uint64_t>(d.samples.size());

        const std::size_t n_pairs = static_cast<std::size_t>(h.tx.size()) * h.rx.size();
        for (const auto &s : d.samples)
        {
            if (s.rss.size() != n_pairs)
                throw DimensionError("sample RSS size differs from the header array sizes");
            for (int k = 0; k < 3; ++k)
                w.put<double>(s.location[k]);
            w.put<double>(s.orientation.alpha);
            w.put<double>(s.orientation.beta);
            w.put<double>(s.orientation.gamma);
            w.put<std::uint32_t>(static_cast<std::uint32_t>(s.label.tx));
            w.put<std::uint32_t>(static_cast<std::uint32_t>(s.label.rx));
            for (float v : s.rss)
                w.put<float>(v);
        }
        return w.bytes();
    }

    Dataset deserialize(std::vector<char> bytes)
    {
        io::ByteReader r(std::move(bytes));
        if (r.get_bytes(4, "magic") != std::string_view(magic, 4))
            throw FormatError("not a beam-alignment dataset (bad magic)");
        const auto version = r.get<std::uint32_t>("format version");
        if (version != dataset_format_version)
            throw FormatError("unsupported dataset format version " + std::to_string(version));

        Dataset d;
        auto &h = d.header;
        h.tx = get_geometry(r);
        h.rx = get_geometry(r);
        h.params.p_t = r.get<double>("system params");
        h.params.sigma_n2 = r.get<double>("system params");
        h.params.t_fr = r.get<double>("system params");
        h.params.t_s = r.get<double>("system params");
        h.params.carrier_hz = r.get<double>("system params");
        h.params.snr_th_db = r.get<double>("system params");
        for (int k = 0; k < 3; ++k)
            h.rx_region.min[k] = r.get<double>("service area");
        for (int k = 0; k < 3; ++k)
            h.rx_region.max[k] = r.get<double>("service area");
        h.full_orientation = r.get<std::uint8_t>("orientation mode") != 0;
        h.scene_hash = r.get<std::uint64_t>("scene hash");
        h.seed = r.get<std::uint64_t>("seed");
        const auto count = r.get<std::uint64_t>("sample count");

        const std::size_t stride = record_bytes(h);
        const std::size_t start = r.offset();
        if (r.remaining() / stride < count)
        {
            const std::size_t complete = r.remaining() / stride;
            throw TruncationError("dataset ends inside sample " + std::to_string(complete) + " of " + std::to_string(count),
                                  start + complete * stride + r.remaining() % stride);
        }
        if (r.remaining() != count * stride)
            throw DimensionError("dataset payload size does not match sample count and array sizes");

        const std::size_t n_pairs = static_cast<std::size_t>(h.tx.size()) * h.rx.size();
        d.samples.resize(count);
        for (std::size_t i = 0; i < count; ++i)
        {
            auto &s = d.samples[i];
            for (int k = 0; k < 3; ++k)
                s.location[k] = r.get<double>("sample location");
            s.orientation.alpha = r.get<double>("sample orientation");
            s.orientation.beta = r.get<double>("sample orientation");
            s.orientation.gamma = r.get<double>("sample orientation");
            s.label.tx = static_cast<int>(r.get<std::uint32_t>("sample label"));
            s.label.rx = static_cast<int>(r.get<std::uint32_t>("sample label"));
            if (s.label.tx >= h.tx.size() || s.label.rx >= h.rx.size())
                throw DimensionError("sample " + std::to_string(i) + " label outside the codebooks");
            s.rss.resize(n_pairs);
            for (auto &v : s.rss)
            {
                v = r.get<float>("sample rss");
                if (!(v >= 0.0f) || !std::isfinite(v))
                    throw FormatError("sample " + std::to_string(i) + " holds an invalid RSS value");
            }
        }
        return d;
    }

    void save(const Dataset &d, const std::string &path)
    {
        io::write_file(path, serialize(d));
    }

    Dataset load(const std::string &path)
    {
        return deserialize(io::read_file(path));
    }

    void export_csv(const Dataset &d, std::ostream &os, bool include_rss)
    {
        const bool tilt = d.header.full_orientation;
        os << "x,y,z,alpha";
        if (tilt)
            os << ",beta,gamma";
        os << ",p_star,q_star";
        if (include_rss)
            for (int p = 0; p < d.n_tx(); ++p)
                for (int q = 0; q < d.n_rx(); ++q)
                    os << ",rss_" << p << '_' << q;
        os << '\n';
        for (const auto &s : d.samples)
        {
            os << format_number(s.location.x()) << ',' << format_number(s.location.y()) << ','
               << format_number(s.location.z()) << ',' << format_number(s.orientation.alpha);
            if (tilt)
                os << ',' << format_number(s.orientation.beta) << ',' << format_number(s.orientation.gamma);
            os << ',' << s.label.tx << ',' << s.label.rx;
            if (include_rss)
                for (float v : s.rss)
                    os << ',' << format_number(v);
            os << '\n';
        }
    }
}
