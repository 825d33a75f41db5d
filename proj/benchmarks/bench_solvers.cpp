#include <benchmark/benchmark.h>

#include "degenctrl/carleman.hpp"
#include "degenctrl/evolution.hpp"
#include "degenctrl/hum.hpp"

using namespace degenctrl;

namespace {

ProblemSpec bench_spec() {
  ProblemSpec spec;
  spec.alpha = 2.5;
  spec.horizon = 0.5;
  spec.omega = {0.0, 0.3};
  spec.u0 = [](double x) { return 1.0 - x; };
  return spec;
}

void BM_ForwardSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemSpec spec = bench_spec();
  const Grid grid = make_grid(n, 2.0, spec.horizon, n);
  const Evolution evo(spec, grid);
  const std::vector<double> u0 = sample_initial(spec, *grid.mesh);
  for (auto _ : state) benchmark::DoNotOptimize(evo.forward(u0));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n * n));
}
BENCHMARK(BM_ForwardSolve)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oN);

void BM_GramianApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemSpec spec = bench_spec();
  const Grid grid = make_grid(n, 2.0, spec.horizon, n);
  const HumSolver hum(spec, grid);
  const std::vector<double> terminal = random_terminal(*grid.mesh, 1);
  for (auto _ : state) benchmark::DoNotOptimize(hum.gramian_apply(terminal));
}
BENCHMARK(BM_GramianApply)->RangeMultiplier(2)->Range(64, 512);

}  // namespace

BENCHMARK_MAIN();
