#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "levytree/gwgen.hpp"
#include "levytree/record.hpp"
#include "levytree/rng.hpp"
#include "levytree/tree.hpp"
#include "oracles.hpp"

using namespace levytree;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

WTree sample_tree() {
  return WTree::build({kNoVertex, 0, 1, 1, 0},
                      {0.0, 1.0, 2.0, 0.5, 3.0},
                      {0.0, 1.0, 2.0, 3.0, 0.5},
                      {0.0, 0.25, 0.0, 0.0, 0.0});
}

MarkedTree sample_marked(const WTree& tree) {
  return MarkedTree::from_marks(tree,
                                {kInf, 5.0, 9.0, 2.0, 1.0},
                                {kInf, 3.0, kInf, kInf, kInf});
}

}  // namespace

TEST_CASE("record values propagate the three-way minimum", "[record]") {
  const WTree t = sample_tree();
  const MarkedTree m = sample_marked(t);
  CHECK(m.theta[0] == kInf);
  CHECK(m.theta[1] == 5.0);   // own edge mark
  CHECK(m.theta[2] == 3.0);   // node mark at the parent
  CHECK(m.theta[3] == 2.0);   // own edge mark under the same parent
  CHECK(m.theta[4] == 1.0);
  CHECK(m.edge_mark[0] == kInf);  // root edge mark is forced

  // theta never increases along a root path.
  for (VertexId v = 1; v < t.size(); ++v) {
    CHECK(m.theta[std::size_t(v)] <= m.theta[std::size_t(t.parent(v))]);
  }

  CHECK_THROWS_AS(MarkedTree::from_marks(t, {1.0, 1.0}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      MarkedTree::from_marks(t, {kInf, -1.0, 1.0, 1.0, 1.0},
                             {kInf, kInf, kInf, kInf, kInf}),
      std::invalid_argument);
}

TEST_CASE("exponential mark assignment", "[record]") {
  const WTree t = sample_tree();
  Rng rng(3, "marks", 0);
  CHECK_THROWS_AS(assign_marks(t, -0.5, rng), std::domain_error);

  // beta = 0 silences every edge clock; node clock at vertex 1 still runs.
  Rng rng0(3, "marks", 0);
  const MarkedTree silent = assign_marks(t, 0.0, rng0);
  for (VertexId v = 0; v < t.size(); ++v) {
    CHECK(silent.edge_mark[std::size_t(v)] == kInf);
  }
  CHECK(silent.node_mark[1] < kInf);

  // Rate-0 clocks consume no randomness: dropping the node mass leaves the
  // edge marks of the same stream untouched.
  const WTree bare = WTree::build({kNoVertex, 0, 1, 1, 0},
                                  {0.0, 1.0, 2.0, 0.5, 3.0},
                                  {0.0, 1.0, 2.0, 3.0, 0.5});
  Rng rng_a(17, "marks", 5);
  Rng rng_b(17, "marks", 5);
  const MarkedTree with_node = assign_marks(t, 0.5, rng_a);
  const MarkedTree without = assign_marks(bare, 0.5, rng_b);
  for (VertexId v = 0; v < t.size(); ++v) {
    CHECK(with_node.edge_mark[std::size_t(v)] ==
          without.edge_mark[std::size_t(v)]);
  }

  // Edge mark on a length-2 edge at beta = 1/2 has rate 2, mean 1/2.
  const WTree pair = WTree::build({kNoVertex, 0}, {0.0, 2.0}, {0.0, 1.0});
  const int reps = 20000;
  double sum = 0.0;
  double sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng_r(11, "marks", std::uint32_t(r));
    const double mark = assign_marks(pair, 0.5, rng_r).edge_mark[1];
    sum += mark;
    sq += mark * mark;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sq - reps * mean * mean) / (reps - 1));
  CHECK(std::abs(mean - 0.5) <= 4.0 * sd / std::sqrt(double(reps)));
}

TEST_CASE("pruned mass is the survivor step function", "[record]") {
  const WTree t = sample_tree();  // must outlive the marked view
  const MarkedTree m = sample_marked(t);
  CHECK(pruned_mass(m, 0.0) == Approx(6.5));
  CHECK(pruned_mass(m, 1.0) == Approx(6.5));   // right-continuous at jumps
  CHECK(pruned_mass(m, 1.5) == Approx(6.0));
  CHECK(pruned_mass(m, 2.5) == Approx(3.0));
  CHECK(pruned_mass(m, 4.0) == Approx(1.0));
  CHECK(pruned_mass(m, 6.0) == 0.0);
  CHECK_THROWS_AS(pruned_mass(m, -1.0), std::domain_error);
}

TEST_CASE("record-time mass integral: closed sum vs step quadrature",
          "[record]") {
  const WTree t = sample_tree();
  const MarkedTree m = sample_marked(t);
  CHECK(theta_integral(m, 0.0) == Approx(17.5).epsilon(1e-14));
  CHECK(theta_integral(m, 2.5) == Approx(3.5).epsilon(1e-14));
  CHECK(theta_integral(m, 10.0) == 0.0);
  for (const double q : {0.0, 0.7, 1.0, 2.5, 4.9}) {
    CHECK(std::abs(theta_integral(m, q) -
                   oracles::theta_integral_via_steps(m, q)) <= 1e-12);
  }

  // Unmarked mass makes the integral infinite and is rejected.
  const MarkedTree never = MarkedTree::from_marks(
      t, {kInf, kInf, kInf, kInf, kInf}, {kInf, kInf, kInf, kInf, kInf});
  CHECK_THROWS_AS(theta_integral(never, 0.0), std::domain_error);
}

TEST_CASE("mass integral dual route on random marked trees", "[record]") {
  for (std::uint32_t rep = 0; rep < 10; ++rep) {
    Rng tree_rng(31, "tree", rep);
    const auto parent =
        sample_conditioned_tree(OffspringLaw::poisson(), 60, tree_rng);
    const WTree tree =
        rescale(parent, ScalingPlan::sigma_one(60, 0.2, 0.3, 2.0));
    Rng mark_rng(31, "marks", rep);
    const MarkedTree m = assign_marks(tree, 0.5, mark_rng);
    for (const double q : {0.0, 0.25, 1.0, 3.0}) {
      const double direct = theta_integral(m, q);
      const double steps = oracles::theta_integral_via_steps(m, q);
      CHECK(std::abs(direct - steps) <= 1e-12 * std::max(1.0, direct));
    }
  }
}

TEST_CASE("class decomposition on a worked example", "[record]") {
  const WTree t = sample_tree();
  const PruneDecomposition d = decompose_classes(sample_marked(t));
  REQUIRE(d.classes.size() == 4);

  CHECK(d.classes[0].theta == 1.0);
  CHECK(d.classes[0].attach == 4);
  CHECK(d.classes[0].sigma == Approx(0.5));
  CHECK(d.classes[1].theta == 2.0);
  CHECK(d.classes[1].attach == 3);
  CHECK(d.classes[2].theta == 3.0);
  CHECK(d.classes[2].attach == 1);  // node mark binds at the branch point
  CHECK(d.classes[2].members == std::vector<VertexId>{2});
  CHECK(d.classes[3].theta == 5.0);
  CHECK(d.classes[3].attach == 1);

  // Graft positions are the mass integral evaluated at each removal time.
  const MarkedTree m = sample_marked(t);
  for (const PruneClass& c : d.classes) {
    CHECK(c.graft_pos == Approx(theta_integral(m, c.theta)).margin(1e-12));
  }
  CHECK(d.classes[3].graft_pos == 0.0);
  CHECK(d.theta_total == Approx(17.5).epsilon(1e-14));
  CHECK(d.sigma_total == Approx(6.5).epsilon(1e-14));
}

TEST_CASE("sibling branches under one node mark form one class", "[record]") {
  const WTree t = WTree::build({kNoVertex, 0, 1, 1},
                               {0.0, 1.0, 1.0, 1.0},
                               {0.0, 1.0, 1.0, 1.0},
                               {0.0, 0.5, 0.0, 0.0});
  const MarkedTree m = MarkedTree::from_marks(
      t, {kInf, 9.0, 8.0, 7.0}, {kInf, 0.5, kInf, kInf});
  const PruneDecomposition d = decompose_classes(m);
  REQUIRE(d.classes.size() == 2);
  CHECK(d.classes[0].theta == 0.5);
  CHECK(d.classes[0].attach == 1);
  CHECK(d.classes[0].members == std::vector<VertexId>{2, 3});
  CHECK(d.classes[0].sigma == Approx(2.0));
  CHECK(d.classes[1].members == std::vector<VertexId>{1});
}

TEST_CASE("equal removal times across classes abort", "[record]") {
  const WTree t = WTree::build({kNoVertex, 0, 0},
                               {0.0, 1.0, 1.0},
                               {0.0, 1.0, 1.0});
  const MarkedTree m = MarkedTree::from_marks(t, {kInf, 4.0, 4.0},
                                              {kInf, kInf, kInf});
  CHECK_THROWS_AS(decompose_classes(m), std::runtime_error);
}

TEST_CASE("class partition properties on random marked trees", "[record]") {
  for (std::uint32_t rep = 0; rep < 10; ++rep) {
    Rng tree_rng(77, "tree", rep);
    const auto parent =
        sample_conditioned_tree(OffspringLaw::geometric(), 80, tree_rng);
    const WTree tree =
        rescale(parent, ScalingPlan::sigma_one(80, 0.15, 0.2, 2.0));
    Rng mark_rng(77, "marks", rep);
    const MarkedTree m = assign_marks(tree, 0.5, mark_rng);
    const PruneDecomposition d = decompose_classes(m);

    // Every non-root vertex lands in exactly one class.
    std::vector<int> covered(std::size_t(tree.size()), 0);
    for (const PruneClass& c : d.classes) {
      double mass = 0.0;
      for (const VertexId v : c.members) {
        ++covered[std::size_t(v)];
        mass += tree.vertex_mass(v);
        CHECK(m.theta[std::size_t(v)] == c.theta);
      }
      CHECK(c.sigma == Approx(mass).epsilon(1e-14));
      CHECK(c.graft_pos ==
            Approx(theta_integral(m, c.theta)).margin(1e-10));
    }
    for (VertexId v = 0; v < tree.size(); ++v) {
      CHECK(covered[std::size_t(v)] == (v == tree.root() ? 0 : 1));
    }
    CHECK(d.sigma_total == Approx(tree.total_mass()).epsilon(1e-13));
    CHECK(d.theta_total == Approx(theta_integral(m, 0.0)).epsilon(1e-12));
    for (std::size_t i = 1; i < d.classes.size(); ++i) {
      CHECK(d.classes[i].theta > d.classes[i - 1].theta);
      CHECK(d.classes[i].graft_pos <= d.classes[i - 1].graft_pos);
    }
  }
}

TEST_CASE("cut counters: exact small cases", "[record]") {
  Rng rng(5, "cuts-edges", 0);
  CHECK(count_cuts_edges(std::vector<VertexId>{kNoVertex}, rng) == 0);
  CHECK(count_cuts_vertices(std::vector<VertexId>{kNoVertex}, rng) == 0);

  // Two vertices: one pick ends both processes.
  const std::vector<VertexId> pair{kNoVertex, 0};
  for (std::uint32_t r = 0; r < 50; ++r) {
    Rng e(5, "cuts-edges", r);
    Rng v(5, "cuts-vertices", r);
    CHECK(count_cuts_edges(pair, e) == 1);
    CHECK(count_cuts_vertices(pair, v) == 1);
  }

  // 3-path: the vertex variant always stops after one pick.
  const std::vector<VertexId> path3{kNoVertex, 0, 1};
  for (std::uint32_t r = 0; r < 200; ++r) {
    Rng v(6, "cuts-vertices", r);
    CHECK(count_cuts_vertices(path3, v) == 1);
  }
  CHECK(oracles::expected_cuts_edges_exact(path3) == Approx(1.5));
  CHECK(oracles::expected_cuts_vertices_exact(path3) == Approx(1.0));

  CHECK_THROWS_AS(count_cuts_edges(std::vector<VertexId>{0, 1}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(count_cuts_edges(std::vector<VertexId>{kNoVertex, 2, 1}, rng),
                  std::invalid_argument);
}

TEST_CASE("cut counters match enumeration on small shapes", "[record]") {
  // A 5-vertex shape with a branch: 0 -> 1 -> {2, 3}, 0 -> 4.
  const std::vector<VertexId> shape{kNoVertex, 0, 1, 1, 0};
  const double exact_e = oracles::expected_cuts_edges_exact(shape);
  const double exact_v = oracles::expected_cuts_vertices_exact(shape);

  const int reps = 20000;
  double sum_e = 0.0, sq_e = 0.0, sum_v = 0.0, sq_v = 0.0;
  for (std::uint32_t r = 0; r < std::uint32_t(reps); ++r) {
    Rng re(9, "cuts-edges", r);
    Rng rv(9, "cuts-vertices", r);
    const double xe = double(count_cuts_edges(shape, re));
    const double xv = double(count_cuts_vertices(shape, rv));
    sum_e += xe;
    sq_e += xe * xe;
    sum_v += xv;
    sq_v += xv * xv;
  }
  const double mean_e = sum_e / reps;
  const double se_e =
      std::sqrt((sq_e - reps * mean_e * mean_e) / (reps - 1) / reps);
  CHECK(std::abs(mean_e - exact_e) <= 4.0 * se_e);
  const double mean_v = sum_v / reps;
  const double se_v =
      std::sqrt((sq_v - reps * mean_v * mean_v) / (reps - 1) / reps);
  CHECK(std::abs(mean_v - exact_v) <= 4.0 * se_v);

  // Identical streams replay identical counts.
  Rng a(10, "cuts-edges", 1);
  Rng b(10, "cuts-edges", 1);
  CHECK(count_cuts_edges(shape, a) == count_cuts_edges(shape, b));
}
