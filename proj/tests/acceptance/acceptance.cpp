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


#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causalnet/checkpoint.hpp"
#include "causalnet/delay_ingest.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/model.hpp"
#include "causalnet/synthdata.hpp"
#include "causalnet/trainer.hpp"
#include "json.hpp"
#include "regression_oracle.hpp"

namespace {

namespace fs = std::filesystem;
using namespace causalnet;
using Eigen::MatrixXd;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = -1;
  std::string out;
  double seconds = 0.0;
};

std::string cli_path;
fs::path work_dir;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CliRun run_cli(const std::string& args) {
  const std::string cmd = cli_path + " " + args + " 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.seconds = seconds_since(t0);
  return r;
}

// The last stdout line of every command is its JSON summary.
json summary_of(const CliRun& r) {
  const auto end = r.out.find_last_not_of('\n');
  if (end == std::string::npos) return json::object();
  const auto begin = r.out.rfind('\n', end);
  return json::parse(r.out.substr(begin == std::string::npos ? 0 : begin + 1, end + 1), nullptr, false);
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = work_dir / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::vector<double> white_noise(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome gradient_integrity() {
  const fs::path dir = fresh_dir("c1");
  const CliRun r = run_cli("gradcheck --airports 3 --input-steps 2 --horizon 2 --hidden 8 -o " + quoted(dir));
  const json s = summary_of(r);
  if (r.code != 0 && !s.contains("max_relative_error")) return {false, "gradcheck exited " + std::to_string(r.code) + ": " + r.out};
  const double err = s.value("max_relative_error", 1.0);
  const bool pass = r.code == 0 && err < 1e-4 && r.seconds < 60.0;
  return {pass, "max relative error " + fmt(err) + " over " + std::to_string(s.value("checked", 0)) +
                    " entries, " + fmt(r.seconds, 3) + " s"};
}

Outcome granger_oracle() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> coef(-0.4, 0.4);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cause = white_noise(rng, 500);
    auto effect = white_noise(rng, 500);
    const double a1 = coef(rng), a2 = coef(rng), b1 = coef(rng), b2 = coef(rng);
    for (std::size_t t = 2; t < 500; ++t) {
      effect[t] += a1 * effect[t - 1] + a2 * effect[t - 2] + b1 * cause[t - 1] + b2 * cause[t - 2];
    }
    const double f = granger_test(effect, cause, 2).f;
    const double ref = testing::oracle_f(effect, cause, 2);
    worst = std::max(worst, std::fabs(f - ref) / std::fabs(ref));
  }
  const double p0 = f_pvalue(0.0, 3.0, 20.0);
  double half_err = 0.0;
  for (double d : {1.0, 5.0, 10.0, 30.0, 200.0}) half_err = std::max(half_err, std::fabs(f_pvalue(1.0, d, d) - 0.5));
  const double p05 = f_pvalue(4.9646, 1.0, 10.0);
  const bool pass = worst < 1e-8 && p0 == 1.0 && half_err < 1e-12 && std::fabs(p05 - 0.05) <= 0.0005;
  return {pass, "worst F relative error " + fmt(worst) + "; p(0)=" + fmt(p0, 17) + "; max |p(1;d,d)-0.5|=" +
                    fmt(half_err) + "; p(4.9646;1,10)=" + fmt(p05, 6)};
}

Outcome planted_recovery() {
  std::array<std::vector<double>, kScaleCount> f1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig sc;
    sc.airports = 8;
    sc.hours = 2000;
    sc.edge_density = 0.15;
    sc.weight_min = 0.5;
    sc.weight_max = 0.9;
    sc.lag_min = 1;
    sc.lag_max = 2;
    sc.noise_std = 1.0;
    sc.seed = seed;
    const SynthDataset ds = generate(sc);
    const CausalGraphSet set = build_graph_set(ds.delays.values, sc.hours - 1, GrangerConfig{});
    for (std::size_t s = 0; s < kScaleCount; ++s) {
      int tp = 0, fp = 0, fn = 0;
      for (Eigen::Index a = 0; a < 8; ++a) {
        for (Eigen::Index b = 0; b < 8; ++b) {
          if (a == b) continue;
          const bool truth = ds.truth.weights(a, b) != 0.0, found = set.graphs[s](a, b) != 0.0;
          tp += truth && found;
          fp += !truth && found;
          fn += truth && !found;
        }
      }
      f1[s].push_back(tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn));
    }
  }
  std::mt19937_64 rng(77);
  int edges = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = white_noise(rng, 500);
    const auto b = white_noise(rng, 500);
    edges += granger_test(a, b, 2).p < 0.05;
  }
  const double rate = edges / 1000.0;
  // The full-history (year) graph is the one scored; the others are reported.
  const double year = median_of(f1[0]);
  std::string detail = "median F1";
  for (std::size_t s = 0; s < kScaleCount; ++s) detail += std::string(" ") + scale_name(kScales[s]) + "=" + fmt(median_of(f1[s]), 3);
  detail += "; white-noise edge frequency " + fmt(rate, 3);
  return {year >= 0.9 && std::fabs(rate - 0.05) <= 0.02, detail};
}

Outcome structural_invariants() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto random_tensor = [&](Shape shape, double scale) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    std::vector<double> v(n);
    for (auto& x : v) x = scale * u(rng);
    return Tensor(shape, std::move(v));
  };
  const auto random_graph = [&](Eigen::Index n) {
    std::bernoulli_distribution edge(0.4);
    MatrixXd g = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = i != j && edge(rng) ? 1.0 : 0.0;
    return g;
  };
  int cm_bad = 0, norm_bad = 0, h_bad = 0, metric_bad = 0;
  double worst_row = 0.0, largest_h = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng), d = dim(rng);
    const Tensor r1 = random_tensor({n, d}, 2.0), r2 = random_tensor({n, d}, 2.0);
    const MatrixXd cm = to_matrix(correction_mask(r1, r2));
    if (cm.minCoeff() < 0.0 || cm.cwiseProduct(cm.transpose()).cwiseAbs().maxCoeff() != 0.0 ||
        to_matrix(correction_mask(r1, r1)).cwiseAbs().maxCoeff() != 0.0) {
      ++cm_bad;
    }
    const MatrixXd norm = to_matrix(normalize_causal(to_tensor(random_graph(static_cast<Eigen::Index>(n)) + cm)));
    double row_err = 0.0;
    for (Eigen::Index i = 0; i < norm.rows(); ++i) row_err = std::max(row_err, std::fabs(norm.row(i).sum() - 1.0));
    worst_row = std::max(worst_row, row_err);
    if (row_err > 1e-12) ++norm_bad;
  }
  ModelConfig mc;
  mc.airports = 4;
  mc.hidden = 5;
  mc.embedding = 3;
  const CausalNet model(mc);
  for (int trial = 0; trial < 1000; ++trial) {
    ParamSet p = model.zero_params();
    for (std::size_t i = 0; i < p.size(); ++i) p.set(i, random_tensor(p.value(i).shape(), 3.0));
    Tensor h = Tensor::zeros({1, 4, 5});
    for (int step = 0; step < 10; ++step) {
      GraphQuad q;
      for (auto& g : q) g = ad::reshape(to_tensor(random_graph(4)), {1, 4, 4});
      const PropagationGraphs g = model.propagation_graphs(q, make_geo_operators(random_graph(4)));
      h = model.lgru_cell(random_tensor({1, 4, 1}, 10.0), h, g, p.values());
      for (double v : h.values()) largest_h = std::max(largest_h, std::fabs(v));
    }
    if (largest_h >= 1.0) ++h_bad;
  }
  std::normal_distribution<double> g(0.0, 10.0);
  std::bernoulli_distribution keep(0.7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index rows = 1 + trial % 6, cols = 1 + trial % 9;
    MatrixXd pred(rows, cols), truth(rows, cols);
    MaskMatrix mask(rows, cols);
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      pred.data()[i] = g(rng);
      truth.data()[i] = g(rng);
      mask.data()[i] = keep(rng);
    }
    mask(0, 0) = true;
    const HorizonMetrics m = evaluate(pred, truth, mask);
    if (m.rmse < m.mae) ++metric_bad;
  }
  const bool pass = cm_bad == 0 && norm_bad == 0 && h_bad == 0 && metric_bad == 0;
  return {pass, "1000 inputs each: CM violations " + std::to_string(cm_bad) + ", worst row-sum error " + fmt(worst_row) +
                    ", max |H| " + fmt(largest_h, 6) + ", RMSE<MAE cases " + std::to_string(metric_bad)};
}

Outcome ablation_direction() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("c5");
  const CliRun gen = run_cli("synth -o " + quoted(dir) + " --set synth.airports=10 --set synth.hours=1440 --set synth.seed=1");
  if (gen.code != 0) return {false, "synth failed: " + gen.out};
  const CliRun run = run_cli("ablate -o " + quoted(dir) +
                             " --set model.hidden=16 --set model.embedding=8 --set train.learning_rate=0.003"
                             " --set train.max_epochs=40 --set train.patience=10 --set train.seed=1"
                             " --set train.repetitions=5 --set 'train.variants=[\"full\",\"NMC\",\"NC\"]'");
  if (run.code != 0) return {false, "ablate failed: " + run.out};
  const double elapsed = seconds_since(t0);
  const json med = summary_of(run)["median_mae"];
  bool ordered = true;
  std::string detail = "median MAE over 5 seeds:";
  for (std::size_t h = 0; h < med["full"].size(); ++h) {
    const double full = med["full"][h], nmc = med["NMC"][h], nc = med["NC"][h], pers = med["persistence"][h];
    ordered = ordered && full <= nmc && full <= nc;
    detail += " h" + std::to_string(h + 1) + " full=" + fmt(full) + " NMC=" + fmt(nmc) + " NC=" + fmt(nc) +
              " persistence=" + fmt(pers) + ";";
  }
  const double gain = 1.0 - med["full"][0].get<double>() / med["persistence"][0].get<double>();
  detail += " h1 gain over persistence " + fmt(100.0 * gain, 3) + "%; " + fmt(elapsed / 60.0, 3) + " min";
  return {ordered && gain >= 0.05 && elapsed < 7200.0, detail};
}

Outcome correction_distance() {
  // Hand fixtures, compared exactly.
  const MatrixXd z = MatrixXd::Zero(2, 2);
  const MatrixQuad zero{z, z, z, z};
  MatrixQuad single = zero, pair = zero;
  single[1](1, 0) = 3.0;
  pair[2] << 0.0, 1.0, 2.0, 0.0;
  pair[3] << 0.5, 0.5, 0.5, 0.5;
  const std::vector<MatrixQuad> raw1{zero}, raw2{zero, zero};
  bool fixtures = analyze_correction(raw1, raw1) == std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
  fixtures = fixtures && analyze_correction(raw1, std::vector<MatrixQuad>{single})[1] == 3.0;
  fixtures = fixtures && analyze_correction(raw1, std::vector<MatrixQuad>{pair})[2] == std::sqrt(5.0);
  fixtures = fixtures && analyze_correction(raw1, std::vector<MatrixQuad>{pair})[3] == 1.0;
  const auto mean = analyze_correction(raw2, std::vector<MatrixQuad>{single, pair});
  fixtures = fixtures && mean == std::array<double, 4>{0.0, 1.5, std::sqrt(5.0) / 2.0, 0.5};

  // End to end through the CLI, then recomputed from the definition.
  const fs::path dir = fresh_dir("c6");
  const std::string common = " -o " + quoted(dir) +
                             " --set synth.airports=5 --set synth.hours=720 --set model.hidden=8 --set model.embedding=4"
                             " --set train.max_epochs=3 --set train.learning_rate=0.003";
  for (const char* cmd : {"synth", "train", "analyze"}) {
    const CliRun r = run_cli(cmd + common);
    if (r.code != 0) return {false, std::string(cmd) + " failed: " + r.out};
  }
  std::ifstream in(dir / "analysis.json");
  const json analysis = json::parse(in, nullptr, false);
  const Checkpoint ckpt = load_checkpoint((dir / "checkpoint.bin").string());
  const DelayMatrix delays = read_delay_matrix((dir / "delays.csv").string(), (dir / "mask.csv").string());
  const auto coords = read_coordinates_csv((dir / "coordinates.csv").string(), delays.airports);
  const PreparedData data = prepare_data(delays, geo_graph(coords).weights, GrangerConfig{}, ckpt.config.input_steps,
                                         ckpt.config.horizon);
  const CorrectionSamples samples =
      collect_correction(CausalNet(ckpt.config), data, ckpt.params, data.split.test.anchors);
  double worst = 0.0;
  std::string values;
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    double total = 0.0;
    for (std::size_t k = 0; k < samples.raw.size(); ++k) {
      double sq = 0.0;
      for (Eigen::Index i = 0; i < samples.raw[k][s].size(); ++i) {
        const double diff = samples.corrected[k][s].data()[i] - samples.raw[k][s].data()[i];
        sq += diff * diff;
      }
      total += std::sqrt(sq);
    }
    const double expected = total / static_cast<double>(samples.raw.size());
    const double reported = analysis["correction_distance"][scale_name(kScales[s])].get<double>();
    worst = std::max(worst, std::fabs(reported - expected) / std::max(1e-300, std::fabs(expected)));
    values += std::string(" ") + scale_name(kScales[s]) + "=" + fmt(reported);
  }
  const bool samples_ok = analysis["samples"].get<std::size_t>() == data.split.test.anchors.size();
  return {fixtures && samples_ok && worst < 1e-12,
          std::string("hand fixtures ") + (fixtures ? "exact" : "MISMATCH") + "; end-to-end distances" + values +
              " over " + std::to_string(samples.raw.size()) + " samples, recomputation error " + fmt(worst)};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome determinism() {
  const fs::path dir = work_dir / "c7" / "run";
  const std::string common = " -o " + quoted(dir) +
                             " --set synth.airports=4 --set synth.hours=720 --set synth.seed=11 --set model.hidden=6"
                             " --set model.embedding=3 --set train.max_epochs=2 --set train.learning_rate=0.003"
                             " --set train.seed=5 --set train.repetitions=2 --set 'train.variants=[\"full\",\"GRU\"]'";
  std::vector<std::map<std::string, std::string>> runs;
  for (int rep = 0; rep < 2; ++rep) {
    fs::remove_all(dir);
    for (const char* cmd : {"synth", "graphs", "train", "eval", "analyze", "ablate"}) {
      const CliRun r = run_cli(cmd + common);
      if (r.code != 0) return {false, std::string(cmd) + " failed: " + r.out};
    }
    runs.push_back(snapshot(dir));
  }
  std::size_t differing = 0;
  std::size_t bytes = 0;
  std::set<std::string> names;
  for (const auto& [name, content] : runs[0]) names.insert(name);
  for (const auto& [name, content] : runs[1]) names.insert(name);
  for (const auto& name : names) {
    const auto a = runs[0].find(name), b = runs[1].find(name);
    if (a == runs[0].end() || b == runs[1].end() || a->second != b->second) ++differing;
    if (a != runs[0].end()) bytes += a->second.size();
  }
  return {differing == 0 && names.size() > 0,
          std::to_string(names.size()) + " artifacts (" + std::to_string(bytes) + " bytes) compared, " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CausalNet acceptance criteria"};
  std::vector<int> only;
  app.add_option("--cli", cli_path, "Path to the causalnet executable")->required();
  std::string work = "acceptance_work";
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  work_dir = fs::absolute(work);
  fs::create_directories(work_dir);

  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"gradient integrity", gradient_integrity},   {"granger oracle equivalence", granger_oracle},
      {"planted-graph recovery", planted_recovery}, {"structural invariants", structural_invariants},
      {"ablation direction", ablation_direction},   {"correction-distance analysis", correction_distance},
      {"determinism", determinism}};
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << " [" << fmt(seconds_since(t0), 4) << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
