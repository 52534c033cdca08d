/******************************************************************************
 * Copyright 2026 The cisca-kit Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/


// Serial reference vs OpenMP kernel timings.

#include <benchmark/benchmark.h>

#include "cisca/grid.hpp"
#include "cisca/gt_encode.hpp"
#include "cisca/metrics.hpp"
#include "cisca/parallel.hpp"
#include "cisca/postprocess.hpp"
#include "cisca/random.hpp"
#include "cisca/sobel.hpp"
#include "cisca/tiling.hpp"

namespace {

using namespace cisca;

Mask random_mask(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Mask m(n, n, 1, 0);
  for (auto& v : m.storage()) v = rng.uniform() < 0.1 ? 1 : 0;
  return m;
}

Tensor random_tensor(std::size_t n, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(n, n, c, 0.0);
  for (auto& v : t.storage()) v = rng.uniform(-1.0, 1.0);
  return t;
}

LabelMap disk_labels(std::size_t n, int count, std::uint64_t seed) {
  Rng rng(seed);
  LabelMap m(n, n, 1, 0);
  for (int id = 1; id <= count; ++id) {
    const double cr = rng.uniform(0.0, double(n)), cc = rng.uniform(0.0, double(n));
    const double r = rng.uniform(4.0, 10.0);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if ((y - cr) * (y - cr) + (x - cc) * (x - cc) <= r * r) m(y, x) = id;
      }
    }
  }
  return m;
}

void set_threads(const benchmark::State& state) { configure_threads(static_cast<int>(state.range(1))); }

void BM_DilateSerial(benchmark::State& state) {
  const auto m = random_mask(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::dilate(m, StructuringElement::disk(2)));
}

void BM_DilateParallel(benchmark::State& state) {
  set_threads(state);
  const auto m = random_mask(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dilate(m, StructuringElement::disk(2)));
}

void BM_Correlate5Serial(benchmark::State& state) {
  const auto t = random_tensor(static_cast<std::size_t>(state.range(0)), 4, 2);
  const auto bank = post::sobel_bank();
  for (auto _ : state) benchmark::DoNotOptimize(post::serial::correlate5(t, 1, bank.kernels[1]));
}

void BM_Correlate5Parallel(benchmark::State& state) {
  set_threads(state);
  const auto t = random_tensor(static_cast<std::size_t>(state.range(0)), 4, 2);
  const auto bank = post::sobel_bank();
  for (auto _ : state) benchmark::DoNotOptimize(post::correlate5(t, 1, bank.kernels[1]));
}

void BM_EdgeStrengthSerial(benchmark::State& state) {
  const auto t = random_tensor(static_cast<std::size_t>(state.range(0)), 4, 3);
  const auto bank = post::sobel_bank();
  for (auto _ : state) benchmark::DoNotOptimize(post::serial::edge_strength(t, bank));
}

void BM_EdgeStrengthParallel(benchmark::State& state) {
  set_threads(state);
  const auto t = random_tensor(static_cast<std::size_t>(state.range(0)), 4, 3);
  const auto bank = post::sobel_bank();
  for (auto _ : state) benchmark::DoNotOptimize(post::edge_strength(t, bank));
}

struct Tiled {
  tiling::TileGrid grid;
  std::vector<tiling::Tile> tiles;
  Tensor window;
};

Tiled tiled(std::size_t n) {
  Tiled t;
  t.grid = tiling::plan_tiles(n, n);
  t.tiles = tiling::extract_tiles(random_tensor(n, 3, 4), t.grid);
  t.window = tiling::spline_window(256);
  return t;
}

void BM_BlendSerial(benchmark::State& state) {
  const auto t = tiled(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tiling::serial::blend_untile(t.tiles, t.grid, t.window));
}

void BM_BlendParallel(benchmark::State& state) {
  set_threads(state);
  const auto t = tiled(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tiling::blend_untile(t.tiles, t.grid, t.window));
}

struct Dataset {
  std::vector<LabelMap> gt, pred;
  std::vector<metrics::ImageRecord> records;
};

Dataset dataset(std::size_t images) {
  Dataset d;
  for (std::size_t i = 0; i < images; ++i) {
    d.gt.push_back(disk_labels(256, 40, 10 + i));
    d.pred.push_back(disk_labels(256, 40, 10 + i));
  }
  for (std::size_t i = 0; i < images; ++i) {
    d.records.push_back({std::to_string(i), &d.gt[i], &d.pred[i], nullptr, nullptr, ""});
  }
  return d;
}

void BM_EvaluateSerial(benchmark::State& state) {
  const auto d = dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::serial::evaluate(d.records, {}));
}

void BM_EvaluateParallel(benchmark::State& state) {
  set_threads(state);
  const auto d = dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::evaluate(d.records, {}));
}

void sizes(benchmark::internal::Benchmark* b) {
  b->UseRealTime()->Unit(benchmark::kMillisecond);
  for (int n : {256, 1024}) b->Args({n, 1});
}

void sizes_threads(benchmark::internal::Benchmark* b) {
  b->UseRealTime()->Unit(benchmark::kMillisecond);
  for (int n : {256, 1024}) {
    for (int t : {1, 2, 4, 8}) b->Args({n, t});
  }
}

}  // namespace

BENCHMARK(BM_DilateSerial)->Apply(sizes);
BENCHMARK(BM_DilateParallel)->Apply(sizes_threads);
BENCHMARK(BM_Correlate5Serial)->Apply(sizes);
BENCHMARK(BM_Correlate5Parallel)->Apply(sizes_threads);
BENCHMARK(BM_EdgeStrengthSerial)->Apply(sizes);
BENCHMARK(BM_EdgeStrengthParallel)->Apply(sizes_threads);
BENCHMARK(BM_BlendSerial)->Apply(sizes);
BENCHMARK(BM_BlendParallel)->Apply(sizes_threads);
BENCHMARK(BM_EvaluateSerial)->Args({20, 1})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Args({20, 1})->Args({20, 2})->Args({20, 4})->Args({20, 8})
    ->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
