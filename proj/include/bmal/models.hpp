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

#ifndef BMAL_MODELS_HPP
#define BMAL_MODELS_HPP

#include "bmal/beam_graph.hpp"
#include "bmal/codebook.hpp"
#include "bmal/geometry.hpp"
#include "bmal/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bmal
{
    // 0-based (TX beam, RX beam)
    struct BeamPair
    {
        int tx = 0;
        int rx = 0;

        bool operator==(const BeamPair &) const = default;
    };

    // What the UE reports: location scaled to [-1, 1] over the service area, raw orientation
    struct UeContext
    {
        Vec3 location = Vec3::Zero();
        Orientation orientation;
    };

    // Linear arrays see only the azimuth rotation; planar arrays see all three angles
    enum class InputMode
    {
        azimuth_only,
        full_orientation
    };

    // Affine map of the service area onto [-1, 1]^3 (degenerate axes map to 0)
    class InputNormalizer
    {
    public:
        InputNormalizer() = default;
        explicit InputNormalizer(Box region) : region_(std::move(region)) {}

        Vec3 normalize(const Vec3 &p) const;
        UeContext context(const Pose &pose) const;
        const Box &region() const { return region_; }

    private:
        Box region_;
    };

    struct GnnHyper
    {
        int feature_dim = 16; // node feature size
        int message_dim = 16; // edge message size
        int n_iter = 1;       // message-passing rounds
        int hidden_layers = 1;
        int hidden_units = 32;
        int in_degree = 2;
    };

    struct DnnHyper
    {
        int hidden_layers = 3;
        int hidden_units = 256;
    };

    int gnn_input_dim(InputMode mode);
    int dnn_input_dim(InputMode mode);

    // Row i: (x, y, z, sin/cos of the orientation angles, beam angles / pi); flattened row-major
    std::vector<double> gnn_node_inputs(const UeContext &ctx, const Codebook &cb, InputMode mode);
    std::vector<double> dnn_inputs(const UeContext &ctx, InputMode mode);

    // Recorded activations of one GNN evaluation
    struct GnnTape
    {
        std::vector<nn::MlpTrace> embed;
        std::vector<std::vector<double>> features;  // per round: N x F node features entering the round
        std::vector<std::vector<nn::MlpTrace>> edge; // per round: one trace per edge, node-major
        std::vector<std::vector<double>> aggregate;  // per round: N x M summed messages
        std::vector<std::vector<nn::MlpTrace>> node; // per round: one trace per node
        std::vector<double> final_features;
        std::vector<nn::MlpTrace> readout;
        std::vector<double> probs;
        int label = -1;
        bool recorded = false;
    };

    // Node classifier over one codebook: embed, n_iter rounds of edge/node updates, readout, softmax
    class GnnModel
    {
    public:
        GnnModel() = default;
        GnnModel(int input_dim, const GnnHyper &hyper, BeamGraph graph);

        const GnnHyper &hyper() const { return hyper_; }
        const BeamGraph &graph() const { return graph_; }
        int input_dim() const { return input_dim_; }
        int node_count() const { return graph_.node_count(); }

        void init_glorot(std::uint64_t seed);

        // node_inputs: node_count x input_dim, row-major
        std::vector<double> logits(std::span<const double> node_inputs) const;
        std::vector<double> forward(std::span<const double> node_inputs) const;

        double forward_loss(std::span<const double> node_inputs, int label, GnnTape &tape) const;

        // Accumulates parameter gradients of the loss recorded in `tape`, then clears it
        void backward(GnnTape &tape);

        std::vector<nn::Tensor *> parameters();
        std::vector<const nn::Tensor *> parameters() const;

        nn::Mlp embed;
        nn::Mlp edge_mlp;
        nn::Mlp node_mlp;
        nn::Mlp readout;

    private:
        void run(std::span<const double> node_inputs, GnnTape *tape, std::vector<double> &logits) const;

        int input_dim_ = 0;
        GnnHyper hyper_;
        BeamGraph graph_;
    };

    // Step-by-step GNN forward for a UE context
    std::vector<double> gnn_forward(const GnnModel &model, const UeContext &ctx, const Codebook &cb, InputMode mode);

    // Outer product; rows index TX beams
    Eigen::MatrixXd pair_probabilities(std::span<const double> p_tx, std::span<const double> p_rx);

    // The n_b most probable pairs, descending; ties go to the lower flat index p * N_r + q
    std::vector<BeamPair> top_nb_candidates(const Eigen::MatrixXd &pair_probs, int n_b);

    // Common surface of the trainable beam selectors
    class BeamModel
    {
    public:
        virtual ~BeamModel() = default;

        virtual std::string kind() const = 0;
        virtual int n_tx() const = 0;
        virtual int n_rx() const = 0;

        virtual Eigen::MatrixXd predict(const UeContext &ctx) const = 0;
        virtual double loss(const UeContext &ctx, BeamPair label) const = 0;
        // Forward + backward; gradients are added into the parameter grad buffers
        virtual double accumulate_gradients(const UeContext &ctx, BeamPair label) = 0;

        virtual std::vector<nn::Tensor *> parameters() = 0;
        virtual std::vector<const nn::Tensor *> parameters() const = 0;
        virtual std::unique_ptr<BeamModel> clone() const = 0;

        // Introspective count over every weight and bias
        std::size_t parameter_count() const;
    };

    // TX and RX GNNs with independent weights; loss CE(tx) + CE(rx)
    class GnnPairModel : public BeamModel
    {
    public:
        GnnPairModel(const Codebook &tx_cb, const Codebook &rx_cb, InputMode mode, const GnnHyper &hyper);

        std::string kind() const override { return "gnn"; }
        int n_tx() const override { return tx_cb_.size(); }
        int n_rx() const override { return rx_cb_.size(); }

        void init_glorot(std::uint64_t seed);

        std::vector<double> tx_probabilities(const UeContext &ctx) const;
        std::vector<double> rx_probabilities(const UeContext &ctx) const;

        Eigen::MatrixXd predict(const UeContext &ctx) const override;
        double loss(const UeContext &ctx, BeamPair label) const override;
        double accumulate_gradients(const UeContext &ctx, BeamPair label) override;

        std::vector<nn::Tensor *> parameters() override;
        std::vector<const nn::Tensor *> parameters() const override;
        std::unique_ptr<BeamModel> clone() const override { return std::make_unique<GnnPairModel>(*this); }

        GnnModel tx;
        GnnModel rx;

    private:
        Codebook tx_cb_;
        Codebook rx_cb_;
        InputMode mode_;
        GnnTape tx_tape_;
        GnnTape rx_tape_;
    };

    // Location/orientation MLP classifying all N_t N_r pairs jointly
    class DnnModel : public BeamModel
    {
    public:
        DnnModel(int n_tx, int n_rx, InputMode mode, const DnnHyper &hyper);

        std::string kind() const override { return "dnn"; }
        int n_tx() const override { return n_tx_; }
        int n_rx() const override { return n_rx_; }

        void init_glorot(std::uint64_t seed);

        // Softmax over flattened pairs
        std::vector<double> forward(const UeContext &ctx) const;

        Eigen::MatrixXd predict(const UeContext &ctx) const override;
        double loss(const UeContext &ctx, BeamPair label) const override;
        double accumulate_gradients(const UeContext &ctx, BeamPair label) override;

        std::vector<nn::Tensor *> parameters() override { return mlp.parameters(); }
        std::vector<const nn::Tensor *> parameters() const override { return mlp.parameters(); }
        std::unique_ptr<BeamModel> clone() const override { return std::make_unique<DnnModel>(*this); }

        nn::Mlp mlp;

    private:
        int n_tx_;
        int n_rx_;
        InputMode mode_;
        nn::MlpTrace trace_;
    };

    // Inference multiplication and parameter counts in the closed forms used for comparison.
    // They count weights only and omit the readout layer.
    std::int64_t count_gnn_multiplications(std::int64_t n_t, std::int64_t n_r, std::int64_t f_n, std::int64_t f_m,
                                           std::int64_t n_iter, std::int64_t n_lg, std::int64_t n_hg);
    std::int64_t count_dnn_multiplications(std::int64_t n_t, std::int64_t n_r, std::int64_t n_ld, std::int64_t n_hd);
    std::int64_t count_gnn_parameters(std::int64_t f_n, std::int64_t f_m, std::int64_t n_lg, std::int64_t n_hg);
    // Weights-only DNN parameter count; equals its multiplication count
    std::int64_t count_dnn_parameters(std::int64_t n_t, std::int64_t n_r, std::int64_t n_ld, std::int64_t n_hd);
}

#endif
