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

#ifndef BMAL_CHECKPOINT_HPP
#define BMAL_CHECKPOINT_HPP

#include "bmal/eval.hpp"
#include "bmal/models.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace bmal
{
    // Everything needed to rebuild a model before its weights are loaded
    struct ModelShape
    {
        std::string kind = "gnn"; // "gnn" or "dnn"
        ArrayGeometry tx = ArrayGeometry::ula(64);
        ArrayGeometry rx = ArrayGeometry::ula(16);
        InputMode mode = InputMode::azimuth_only;
        GnnHyper gnn;
        DnnHyper dnn;
        Box rx_region;
    };

    struct CheckpointInfo
    {
        ModelShape shape;
        TrainConfig train;
        std::uint64_t seed = 0;
        int epochs_run = 0;
        int best_epoch = -1;
        std::uint64_t scene_hash = 0;
    };

    // Fresh Glorot-initialized model
    std::unique_ptr<BeamModel> make_model(const ModelShape &shape, std::uint64_t seed);

    // Writes `path` (binary weights) and `path + ".json"` (metadata sidecar)
    void save_model(const BeamModel &model, const CheckpointInfo &info, const std::string &path);

    struct LoadedModel
    {
        std::unique_ptr<BeamModel> model;
        CheckpointInfo info;
    };

    LoadedModel load_model(const std::string &path);
}

#endif
