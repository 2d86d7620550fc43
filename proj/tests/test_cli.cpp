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

#include <doctest.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace
{
    const fs::path work = fs::temp_directory_path() / "bmal_cli_test";

    int run(const std::string &args)
    {
        const std::string cmd = std::string(BMAL_CLI_PATH) + " " + args + " > " + (work / "stdout.txt").string() + " 2> " + (work / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    void write(const fs::path &p, const std::string &text)
    {
        std::ofstream os(p, std::ios::binary);
        os << text;
    }

    const char *tiny_yaml = R"(arrays:
  tx: {kind: ula, n: 8}
  rx: {kind: ula, n: 4}
dataset: {n_samples: 120, seed: 3}
gnn: {feature_dim: 8, message_dim: 8, hidden_units: 16}
training: {max_epochs: 2, batch_size: 32}
evaluation: {n_b: [1, 2]}
)";
}

TEST_CASE("command line workflow and exit codes")
{
    fs::remove_all(work);
    fs::create_directories(work);
    const auto cfg = (work / "tiny.yaml").string();
    write(cfg, tiny_yaml);
    const auto data = (work / "d.bmal").string();
    const auto model = (work / "gnn.bmnn").string();

    CHECK(run("--help") == 0);
    CHECK(run("gen --config " + cfg + " --out " + data) == 0);
    CHECK(run("--seed 4 --threads 2 gen --config " + cfg + " --out " + (work / "d4.bmal").string()) == 0);
    CHECK(slurp(data) != slurp(work / "d4.bmal"));

    CHECK(run("train --config " + cfg + " --data " + data + " --model gnn --out " + model) == 0);
    CHECK(fs::exists(model + ".json"));
    CHECK(run("eval --model " + model + " --data " + data + " --nb 1,2") == 0);
    const auto metrics = slurp(work / "stdout.txt");
    CHECK(metrics.rfind("model,n_b,", 0) == 0);
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 3);
    CHECK(run("eval --model " + model + " --data " + data + " --nb 1 --sigma-p 0.2 --out " + (work / "m.csv").string()) == 0);
    CHECK(fs::exists(work / "m.csv"));

    CHECK(run("export-csv --data " + data) == 0);
    CHECK(slurp(work / "stdout.txt").rfind("x,y,z,alpha,p_star,q_star", 0) == 0);
    CHECK(run("export-graph --config " + cfg + " --side tx") == 0);

    CHECK(run("complexity --config " + std::string(BMAL_SOURCE_DIR) + "/configs/lr_ula.yaml") == 0);
    CHECK(slurp(work / "stdout.txt") == "method,multiplications,parameters\ngnn,376320,6336\ndnn,394240,394240\n");

    // config errors
    CHECK(run("gen --config " + (work / "missing.yaml").string() + " --out " + data) == 2);
    write(work / "bad.yaml", "arrays: {tx: {kind: ula, n: abc}}\n");
    CHECK(run("gen --config " + (work / "bad.yaml").string() + " --out " + data) == 2);
    CHECK(slurp(work / "stderr.txt").find("arrays.tx.n") != std::string::npos);
    CHECK(run("frobnicate") == 2);
    CHECK(run("train --config " + cfg + " --data " + data + " --model cnn --out " + model) == 2);

    // data errors
    auto bytes = slurp(data);
    write(work / "cut.bmal", bytes.substr(0, bytes.size() - 7));
    CHECK(run("export-csv --data " + (work / "cut.bmal").string()) == 3);
    CHECK(run("export-csv --data " + (work / "none.bmal").string()) == 3);
    write(work / "other.yaml", std::string(tiny_yaml) + "channel: {max_order: 1}\n");
    CHECK(run("train --config " + (work / "other.yaml").string() + " --data " + data + " --model gnn --out " + model) == 3);

    fs::remove_all(work);
}
