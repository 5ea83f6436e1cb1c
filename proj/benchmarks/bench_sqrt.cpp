// Wall time of the three solution methods on the nested-radical problem.
// Complexity fits: gbe and rollout are linear in T, augmentation is
// exponential.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gbe/problems.hpp"
#include "gbe/solver.hpp"

namespace {

void BM_Gbe(benchmark::State& state) {
  const gbe::SqrtProblem p = gbe::sqrt_msop(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    gbe::ValueTable table = gbe::solve_gbe(p.msop, p.space);
    benchmark::DoNotOptimize(table);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gbe)->RangeMultiplier(10)->Range(100, 100000)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_Augment(benchmark::State& state) {
  const gbe::SqrtProblem p = gbe::sqrt_msop(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const gbe::AugmentedMsop aug = gbe::augment_forward_separable(p.msop, p.fwd);
    gbe::ValueTable table = gbe::solve_augmented(aug);
    benchmark::DoNotOptimize(table);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Augment)
    ->DenseRange(8, 16, 2)
    ->Unit(benchmark::kMillisecond)
    ->Complexity([](benchmark::IterationCount n) { return std::pow(2.0, static_cast<double>(n)); });

void BM_Rollout(benchmark::State& state) {
  const gbe::SqrtProblem p = gbe::sqrt_msop(static_cast<int>(state.range(0)));
  const gbe::Policy base = gbe::sqrt_base_policy();
  for (auto _ : state) {
    gbe::Trajectory traj = gbe::rollout_policy(p.msop, base, *p.msop.initial_state);
    benchmark::DoNotOptimize(traj);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Rollout)->RangeMultiplier(10)->Range(100, 100000)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_DubinsSweep(benchmark::State& state) {
  const double scale = static_cast<double>(state.range(0)) / 100.0;
  const gbe::PlanningProblem p = gbe::dubins_problem(gbe::kDefaultDubinsSeed, scale);
  for (auto _ : state) {
    gbe::ValueTable table = gbe::solve_gbe(p.msop, p.space);
    benchmark::DoNotOptimize(table);
  }
  state.counters["states"] = static_cast<double>(p.space.size());
}
BENCHMARK(BM_DubinsSweep)->Arg(40)->Arg(50)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
