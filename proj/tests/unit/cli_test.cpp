/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <filesystem>

#include "causalnet/delay_ingest.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/synthdata.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace causalnet {
namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(CAUSALNET_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json last_line(const std::string& out) {
  const auto end = out.find_last_not_of('\n');
  const auto begin = out.rfind('\n', end);
  return nlohmann::json::parse(out.substr(begin == std::string::npos ? 0 : begin + 1, end + 1));
}

TEST(CliTest, ExitCodes) {
  testing::TempDir dir("cli_codes");
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("defaults").code, 0);
  EXPECT_EQ(run_cli("synth --set model.hiden=3 -o " + dir.path().string()).code, 2);
  EXPECT_EQ(run_cli("synth --set model.hidden=bad -o " + dir.path().string()).code, 2);
  EXPECT_EQ(run_cli("synth -c " + dir.file("missing.json")).code, 3);
  EXPECT_EQ(run_cli("train -o " + dir.file("empty")).code, 2);  // no delays.csv to fall back on
  {
    std::ofstream(dir.file("delays.csv")) << "hour,A\n2024-01-01T00:00:00Z,x\n";
  }
  EXPECT_EQ(run_cli("graphs --set paths.delays=\"" + dir.file("delays.csv") + "\" -o " + dir.path().string()).code, 4);
}

TEST(CliTest, DefaultsParseBack) {
  const CliRun r = run_cli("defaults");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.contains("granger"));
  EXPECT_TRUE(doc.contains("paths"));
}

TEST(CliTest, EvalOfTruthAgainstItselfIsZero) {
  testing::TempDir dir("cli_eval");
  DelayMatrix m;
  m.airports = {"AAA", "BBB"};
  m.start_hour = 100;
  m.values = Eigen::MatrixXd::Random(2, 30) * 10.0;
  m.mask = MaskMatrix::Constant(2, 30, true);
  write_delay_matrix(m, dir.file("truth.csv"), dir.file("mask.csv"));
  const CliRun r = run_cli("eval --set paths.predictions=\"" + dir.file("truth.csv") + "\" --set paths.truth=\"" +
                           dir.file("truth.csv") + "\" -o " + dir.path().string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto summary = last_line(r.out);
  EXPECT_EQ(summary["mae"], 0.0);
  EXPECT_EQ(summary["rmse"], 0.0);
}

TEST(CliTest, GraphsRecoverPlantedEdge) {
  testing::TempDir dir("cli_graphs");
  const std::string synth = "synth -o " + dir.path().string() +
                            " --set synth.airports=2 --set synth.receivers=1 --set synth.edge_density=1"
                            " --set synth.weight_min=0.8 --set synth.weight_max=0.8 --set synth.lag_max=1"
                            " --set synth.noise_std=2 --set synth.hours=1000 --set synth.seed=3";
  ASSERT_EQ(run_cli(synth).code, 0);
  const CliRun g = run_cli("graphs -o " + dir.path().string());
  ASSERT_EQ(g.code, 0);
  const GroundTruth truth = read_ground_truth_json(dir.file("ground_truth.json"));
  Eigen::Index to = 0, from = 0;
  ASSERT_GT(truth.weights.maxCoeff(&to, &from), 0.0);
  const auto summary = last_line(g.out);
  const std::size_t sets = summary["graph_sets"];
  ASSERT_GT(sets, 0u);
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir.file("graphs"))) files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  ASSERT_EQ(files.size(), sets);
  const CausalGraphSet last = read_graph_set_json(files.back());
  EXPECT_EQ(last.graphs[3](to, from), 1.0);
  EXPECT_EQ(last.graphs[2](to, from), 1.0);
}

TEST(CliTest, SmallGradcheckPasses) {
  testing::TempDir dir("cli_grad");
  const CliRun r = run_cli("gradcheck --airports 2 --input-steps 1 --horizon 1 --hidden 3 -o " + dir.path().string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto summary = last_line(r.out);
  EXPECT_TRUE(summary["passed"].get<bool>());
  EXPECT_LT(summary["max_relative_error"].get<double>(), 1e-4);
  EXPECT_EQ(run_cli("gradcheck --airports 2 --input-steps 1 --horizon 1 --hidden 3 --eps 1 -o " + dir.path().string()).code, 2);
}

TEST(CliTest, TrainEvalAnalyzePipeline) {
  testing::TempDir dir("cli_pipeline");
  const std::string common = " -o " + dir.path().string() +
                             " --set synth.airports=3 --set synth.hours=500 --set model.hidden=4"
                             " --set model.embedding=2 --set train.max_epochs=1 --set train.learning_rate=0.003";
  ASSERT_EQ(run_cli("synth" + common).code, 0);
  const CliRun t = run_cli("train" + common);
  ASSERT_EQ(t.code, 0) << t.out;
  EXPECT_TRUE(std::filesystem::exists(dir.file("checkpoint.bin")));
  EXPECT_TRUE(std::filesystem::exists(dir.file("metrics.csv")));
  const CliRun e = run_cli("eval" + common);
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(last_line(e.out)["test"], last_line(t.out)["test"]);
  const CliRun a = run_cli("analyze" + common);
  ASSERT_EQ(a.code, 0);
  const auto summary = last_line(a.out);
  EXPECT_TRUE(summary.contains("susceptibility_spearman"));
  EXPECT_GE(summary["correction_distance"]["day"].get<double>(), 0.0);
}

}  // namespace
}  // namespace causalnet
