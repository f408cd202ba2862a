#include <benchmark/benchmark.h>

#include <cmath>

#include "levytree/gwgen.hpp"
#include "levytree/record.hpp"
#include "levytree/regraft.hpp"
#include "levytree/rng.hpp"

using namespace levytree;

namespace {

WTree make_tree(VertexId n) {
  Rng rng(9, "bench-record-tree", std::uint32_t(n));
  const auto parent = sample_conditioned_tree(OffspringLaw::poisson(), n, rng);
  return rescale(parent, ScalingPlan::sigma_one(n, 1.0 / std::sqrt(double(n))));
}

}  // namespace

static void BM_MarksAndDecompose(benchmark::State& state) {
  const WTree tree = make_tree(VertexId(state.range(0)));
  std::uint32_t replica = 0;
  for (auto _ : state) {
    Rng rng(9, "bench-marks", replica++);
    const MarkedTree marked = assign_marks(tree, 0.5, rng);
    const PruneDecomposition decomp = decompose_classes(marked);
    benchmark::DoNotOptimize(decomp.theta_total);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MarksAndDecompose)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_RegraftRoundTrip(benchmark::State& state) {
  const WTree tree = make_tree(VertexId(state.range(0)));
  std::uint32_t replica = 0;
  for (auto _ : state) {
    Rng rng(9, "bench-regraft", replica++);
    const MarkedTree marked = assign_marks(tree, 0.5, rng);
    const PruneDecomposition decomp = decompose_classes(marked);
    const auto subtrees = extract_class_subtrees(marked, decomp);
    const WTree rebuilt = build_regraft_tree(decomp, subtrees);
    benchmark::DoNotOptimize(rebuilt.total_length());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RegraftRoundTrip)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

static void BM_CutCountsEdges(benchmark::State& state) {
  const VertexId n = VertexId(state.range(0));
  Rng tree_rng(9, "bench-cuts-tree", 0);
  const auto parent = sample_conditioned_tree(OffspringLaw::poisson(), n, tree_rng);
  std::uint32_t replica = 0;
  for (auto _ : state) {
    Rng rng(9, "bench-cuts", replica++);
    benchmark::DoNotOptimize(count_cuts_edges(parent, rng));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CutCountsEdges)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
