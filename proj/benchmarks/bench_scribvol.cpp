// Copyright 2026 The scribvol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "scribvol/evalsim.hpp"
#include "scribvol/propagate.hpp"
#include "scribvol/shapeprior.hpp"
#include "scribvol/supervoxel.hpp"

using namespace scribvol;

namespace {

eval::Phantom phantom(std::size_t n) {
  return eval::make_phantom(eval::PhantomKind::kMultiOrgan, {n, n, 16}, {1.0, 1.0, 4.0}, 0.05, 1);
}

void BM_Slic(benchmark::State& state) {
  const auto ph = phantom(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(supervoxel::slic3d(ph.volume, 150, 0.4, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ph.volume.size()));
}
BENCHMARK(BM_Slic)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RandomWalker(benchmark::State& state) {
  const auto ph = phantom(static_cast<std::size_t>(state.range(0)));
  const auto full = eval::simulate_scribbles(ph.labels);
  const auto one = propagate::restrict_to_slices(full, {8});
  for (auto _ : state) benchmark::DoNotOptimize(propagate::expand_random_walker(ph.volume, one, {}));
}
BENCHMARK(BM_RandomWalker)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Hd95(benchmark::State& state) {
  const auto a = phantom(static_cast<std::size_t>(state.range(0))).labels;
  const auto b = eval::make_phantom(eval::PhantomKind::kMultiOrgan, a.geometry().dims(), a.geometry().spacing(),
                                    0.0, 2)
                     .labels;
  for (auto _ : state) benchmark::DoNotOptimize(eval::hd95(a, b, 1));
}
BENCHMARK(BM_Hd95)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MatchCost(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<std::array<double, 2>> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& p : a) p = {u(rng), u(rng)};
  for (auto& p : b) p = {u(rng), u(rng)};
  const auto ca = shape::skeleton_context(a, a.size());
  const auto cb = shape::skeleton_context(b, b.size());
  for (auto _ : state) benchmark::DoNotOptimize(shape::match_cost(ca, cb));
}
BENCHMARK(BM_MatchCost)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
