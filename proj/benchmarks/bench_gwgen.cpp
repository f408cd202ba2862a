#include <benchmark/benchmark.h>

#include "levytree/gwgen.hpp"
#include "levytree/rng.hpp"

using namespace levytree;

// Rejection cost grows like n^1.5 draws per accepted tree.
static void BM_ConditionedTreePoisson(benchmark::State& state) {
  const OffspringLaw law = OffspringLaw::poisson();
  const VertexId n = VertexId(state.range(0));
  Rng rng(1, "bench-tree", 0);
  for (auto _ : state) {
    auto parent = sample_conditioned_tree(law, n, rng);
    benchmark::DoNotOptimize(parent.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConditionedTreePoisson)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_ConditionedTreeGeometric(benchmark::State& state) {
  const OffspringLaw law = OffspringLaw::geometric();
  const VertexId n = VertexId(state.range(0));
  Rng rng(1, "bench-tree-geo", 0);
  for (auto _ : state) {
    auto parent = sample_conditioned_tree(law, n, rng);
    benchmark::DoNotOptimize(parent.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConditionedTreeGeometric)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_Rescale(benchmark::State& state) {
  const VertexId n = VertexId(state.range(0));
  Rng rng(1, "bench-rescale", 0);
  const auto parent = sample_conditioned_tree(OffspringLaw::poisson(), n, rng);
  const ScalingPlan plan = ScalingPlan::sigma_one(n, 0.05);
  for (auto _ : state) {
    WTree tree = rescale(parent, plan);
    benchmark::DoNotOptimize(tree.total_mass());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Rescale)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_CalibrateEdgeScale(benchmark::State& state) {
  const OffspringLaw law = OffspringLaw::poisson();
  const VertexId n = VertexId(state.range(0));
  std::uint32_t pilot = 0;
  for (auto _ : state) {
    Rng rng(1, "bench-pilot", pilot++);
    const CalibrationResult res = calibrate_edge_scale(law, n, 200, rng);
    benchmark::DoNotOptimize(res.edge_scale);
  }
}
BENCHMARK(BM_CalibrateEdgeScale)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
