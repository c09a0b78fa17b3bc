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


#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "causalnet/tensor.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/model.hpp"
#include "causalnet/synthdata.hpp"
#include "causalnet/trainer.hpp"

namespace {

using namespace causalnet;

Tensor random_tensor(std::mt19937_64& rng, Shape shape) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return Tensor(shape, std::move(v));
}

void BM_BatchedMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = random_tensor(rng, {64, n, n});
  const Tensor b = random_tensor(rng, {64, n, 64});
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 64 * static_cast<std::int64_t>(n * n * 64));
}
BENCHMARK(BM_BatchedMatmul)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_GrangerTest(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(granger_test(a, b, 2));
}
BENCHMARK(BM_GrangerTest)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_BuildGraphSet(benchmark::State& state) {
  SynthConfig sc;
  sc.airports = static_cast<std::size_t>(state.range(0));
  sc.hours = 1440;
  const SynthDataset ds = generate(sc);
  for (auto _ : state) benchmark::DoNotOptimize(build_graph_set(ds.delays.values, sc.hours - 1, GrangerConfig{}));
}
BENCHMARK(BM_BuildGraphSet)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

struct ModelBench {
  ModelConfig cfg;
  PreparedData data;
  Batch batch;

  explicit ModelBench(std::size_t hidden) {
    SynthConfig sc;
    sc.hours = 1440;
    const SynthDataset ds = generate(sc);
    cfg.airports = sc.airports;
    cfg.hidden = hidden;
    cfg.embedding = 8;
    data = prepare_data(ds.delays, geo_graph(ds.truth.coordinates).weights, GrangerConfig{}, cfg.input_steps,
                        cfg.horizon);
    const std::vector<std::size_t> anchors(data.split.train.anchors.begin(), data.split.train.anchors.begin() + 16);
    batch = make_batch(data, anchors, cfg.input_steps, cfg.horizon);
  }
};

void BM_ModelForward(benchmark::State& state) {
  const ModelBench mb(static_cast<std::size_t>(state.range(0)));
  const CausalNet model(mb.cfg);
  const ParamSet p = model.init_params(1);
  const GeoOperators geo = make_geo_operators(mb.data.geo);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(mb.batch.inputs, geo, p.values()));
}
BENCHMARK(BM_ModelForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  const ModelBench mb(static_cast<std::size_t>(state.range(0)));
  const CausalNet model(mb.cfg);
  const ParamSet p = model.init_params(1);
  const GeoOperators geo = make_geo_operators(mb.data.geo);
  for (auto _ : state) {
    Tape tape;
    std::vector<Tensor> vars;
    for (std::size_t i = 0; i < p.size(); ++i) vars.push_back(tape.variable(p.value(i)));
    const auto preds = model.forward(mb.batch.inputs, geo, vars);
    const Tensor loss = masked_mae(preds, mb.batch.targets, mb.batch.masks, mb.batch.observed);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
