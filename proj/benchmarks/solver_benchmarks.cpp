// Copyright 2026 The kaczmarz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "kaczmarz/problems.hpp"
#include "kaczmarz/solvers.hpp"

namespace {

kaczmarz::DenseSystem make_system(std::size_t m, std::size_t n) {
  kaczmarz::ProblemSpec spec;
  spec.source = kaczmarz::GeneratedSource{kaczmarz::Distribution::kGaussian, m, n, 7};
  spec.solution_seed = 11;
  spec.corruption = kaczmarz::CorruptionSpec{0.05, 0.0, 1.0, 1.0, 13};
  return kaczmarz::generate_system(spec);
}

kaczmarz::SelectorKind selector_for(int which) {
  switch (which) {
    case 0: return kaczmarz::Rk{};
    case 1: return kaczmarz::Qrk{0.8};
    case 2: return kaczmarz::Rqrk{0.5};
    case 3: return kaczmarz::Dqrk{0.6, 0.8};
    default: return kaczmarz::Motzkin{};
  }
}

void BM_Select(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  kaczmarz::Rng rng(3);
  std::vector<double> residuals(m);
  for (auto& r : residuals) r = rng.uniform();
  const std::vector<double> norms(m, 1.0);
  kaczmarz::RowSelector selector(selector_for(static_cast<int>(state.range(1))), norms);
  for (auto _ : state) benchmark::DoNotOptimize(selector.select(residuals, rng));
  state.SetLabel(kaczmarz::describe(selector.kind()));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Select)->ArgsProduct({{1000, 10000}, {0, 1, 2, 3, 4}});

/// Whole solve loop with recording off: per-iteration cost of each method.
void BM_Solve(benchmark::State& state) {
  const auto system = make_system(static_cast<std::size_t>(state.range(0)),
                                  static_cast<std::size_t>(state.range(0) / 10));
  kaczmarz::SolverConfig config;
  config.selector = selector_for(static_cast<int>(state.range(1)));
  config.max_iters = 1000;
  config.record = false;
  config.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(kaczmarz::solve(system, config));
  state.SetLabel(kaczmarz::describe(config.selector));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.max_iters));
}
BENCHMARK(BM_Solve)->ArgsProduct({{1000}, {0, 1, 2, 3, 4}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
