#include <benchmark/benchmark.h>

#include "levytree/mechanism.hpp"

using namespace levytree;

static void BM_SolveVBrownian(benchmark::State& state) {
  const MechanismAnalytics analytics(BranchingMechanism::brownian());
  double a = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytics.solve_v(a));
    a = a < 4.0 ? a + 0.25 : 0.5;  // sweep the argument to defeat caching
  }
}
BENCHMARK(BM_SolveVBrownian);

static void BM_SolveVStable(benchmark::State& state) {
  const MechanismAnalytics analytics(BranchingMechanism::stable(1.0, 1.5));
  double a = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytics.solve_v(a));
    a = a < 4.0 ? a + 0.25 : 0.5;
  }
}
BENCHMARK(BM_SolveVStable);

static void BM_SolveVAtoms(benchmark::State& state) {
  const MechanismAnalytics analytics(BranchingMechanism::with_atoms(
      {{0.5, 1.0}, {2.0, 0.25}}, 0.0, 0.5));
  double a = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytics.solve_v(a));
    a = a < 4.0 ? a + 0.25 : 0.5;
  }
}
BENCHMARK(BM_SolveVAtoms);

static void BM_BismutLaplace(benchmark::State& state) {
  const MechanismAnalytics analytics(BranchingMechanism::stable(1.0, 1.5));
  double lambda = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytics.bismut_laplace(lambda, 0.3));
    lambda = lambda < 8.0 ? lambda * 1.5 : 0.1;
  }
}
BENCHMARK(BM_BismutLaplace);

static void BM_ZMoment(benchmark::State& state) {
  int n = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(z_moment(1.5, 1.0, n));
    n = n % 8 + 1;
  }
}
BENCHMARK(BM_ZMoment);

BENCHMARK_MAIN();
