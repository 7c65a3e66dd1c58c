#include <benchmark/benchmark.h>

#include "bench_market.hpp"

static void BM_Solve(benchmark::State& state) {
  const auto market = bench::square_market(state.range(0));
  for (auto _ : state) {
    auto eq = choosiow::solve(market);
    benchmark::DoNotOptimize(eq.residual_norm);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Solve)->RangeMultiplier(2)->Range(1, 128)->Complexity();

static void BM_ObjectiveH(benchmark::State& state) {
  const auto market = bench::square_market(state.range(0));
  const choosiow::Vector b = choosiow::initial_guess(market.population);
  for (auto _ : state) {
    auto eval = choosiow::objective_H(b, market.gains);
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_ObjectiveH)->RangeMultiplier(4)->Range(4, 256);
