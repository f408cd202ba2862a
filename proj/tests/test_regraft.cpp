#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "levytree/gwgen.hpp"
#include "levytree/record.hpp"
#include "levytree/regraft.hpp"
#include "levytree/rng.hpp"
#include "levytree/tree.hpp"

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

WTree two_vertex_subtree(double edge, double mass) {
  return WTree::build({kNoVertex, 0}, {0.0, edge}, {0.0, mass});
}

// The bare branch end is the only childless zero-mass vertex once every
// non-root source vertex carries mass.
VertexId find_branch_end(const WTree& t) {
  VertexId found = kNoVertex;
  for (VertexId v = 0; v < t.size(); ++v) {
    if (t.children(v).empty() && t.vertex_mass(v) == 0.0) {
      REQUIRE(found == kNoVertex);
      found = v;
    }
  }
  REQUIRE(found != kNoVertex);
  return found;
}

}  // namespace

TEST_CASE("class subtrees are standalone copies", "[regraft]") {
  const WTree t = sample_tree();
  const MarkedTree m = sample_marked(t);
  const PruneDecomposition d = decompose_classes(m);
  const auto subs = extract_class_subtrees(m, d);
  REQUIRE(subs.size() == d.classes.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CHECK(subs[i].size() == VertexId(d.classes[i].members.size()) + 1);
    CHECK(subs[i].vertex_mass(subs[i].root()) == 0.0);
    CHECK(subs[i].total_mass() == Approx(d.classes[i].sigma));
  }
  // Classes sort ascending theta: {4}, {3}, {2}, {1}. Edge lengths and the
  // node mass at source vertex 1 survive the copy.
  CHECK(subs[0].edge_len(1) == 3.0);
  CHECK(subs[1].edge_len(1) == 0.5);
  CHECK(subs[2].edge_len(1) == 2.0);
  CHECK(subs[3].edge_len(1) == 1.0);
  CHECK(subs[3].node_mass(1) == 0.25);
}

TEST_CASE("regraft tree on the worked example", "[regraft]") {
  const WTree t = sample_tree();
  const MarkedTree m = sample_marked(t);
  const PruneDecomposition d = decompose_classes(m);
  const auto subs = extract_class_subtrees(m, d);
  const WTree re = build_regraft_tree(d, subs);

  // Chain of 5 (root + stops at 2, 5, 11, 17.5) plus one member per class.
  REQUIRE(re.size() == 9);
  CHECK(re.total_mass() == Approx(t.total_mass()));
  CHECK(re.total_length() == Approx(17.5 + 3.0 + 0.5 + 2.0 + 1.0));
  CHECK(re.height(4) == Approx(17.5));
  CHECK(re.vertex_mass(4) == 0.0);
  CHECK(find_branch_end(re) == 4);

  // Graft attach points sit at the class positions; the latest-removed
  // class hangs at the root.
  CHECK(re.parent(5) == 3);   // sigma 0.5 at position 11
  CHECK(re.parent(6) == 2);   // sigma 3 at position 5
  CHECK(re.parent(7) == 1);   // sigma 2 at position 2
  CHECK(re.parent(8) == 0);   // sigma 1 at position 0
  CHECK(re.height(5) == Approx(11.0 + 3.0));
  CHECK(re.node_mass(0) == 0.0);
  CHECK(re.node_mass(8) == Approx(0.25));  // node mass of source vertex 1

  CHECK_THROWS_AS(build_regraft_tree(d, std::vector<WTree>{}),
                  std::invalid_argument);
}

TEST_CASE("regraft positions validate and merge", "[regraft]") {
  PruneDecomposition d;
  d.theta_total = 1.0;
  d.sigma_total = 0.5;
  d.classes.push_back(PruneClass{1.0, 0, 0.2, 0.5 + 5e-16, {}});
  d.classes.push_back(PruneClass{2.0, 0, 0.3, 0.5, {}});
  const std::vector<WTree> subs{two_vertex_subtree(1.0, 0.2),
                                two_vertex_subtree(2.0, 0.3)};
  const WTree re = build_regraft_tree(d, subs);
  // Positions within 1e-15 share one subdivision vertex: chain 0-1-2 with
  // stops {0.5, 1.0} plus the two members.
  REQUIRE(re.size() == 5);
  CHECK(re.parent(3) == 1);
  CHECK(re.parent(4) == 1);
  CHECK(re.height(1) == Approx(0.5));
  CHECK(re.height(2) == Approx(1.0));

  PruneDecomposition bad = d;
  bad.classes[0].graft_pos = 1.5;  // beyond Theta
  CHECK_THROWS_AS(build_regraft_tree(bad, subs), std::invalid_argument);

  const PruneDecomposition empty;
  const WTree bare = build_regraft_tree(empty, {});
  CHECK(bare.size() == 1);
  CHECK(bare.total_mass() == 0.0);
}

TEST_CASE("regraft handles an all-zero-mass decomposition", "[regraft]") {
  PruneDecomposition d;
  d.theta_total = 0.0;
  d.classes.push_back(PruneClass{1.0, 0, 0.0, 0.0, {}});
  const std::vector<WTree> subs{two_vertex_subtree(0.75, 0.0)};
  const WTree re = build_regraft_tree(d, subs);
  REQUIRE(re.size() == 2);
  CHECK(re.total_mass() == 0.0);
  CHECK(re.total_length() == Approx(0.75));
}

TEST_CASE("summaries on both sides of the comparison", "[regraft]") {
  const WTree t = sample_tree();
  const MarkedTree m = sample_marked(t);
  const PruneDecomposition d = decompose_classes(m);
  const std::vector<double> eps{2.5, 0.75};

  const RegraftSummary rs = regraft_summary(d, eps);
  CHECK(rs.branch_len == Approx(17.5));
  REQUIRE(rs.atoms.size() == 4);
  CHECK(rs.atoms[0].pos == 0.0);
  CHECK(rs.atoms[0].mass == Approx(1.0));
  CHECK(rs.atoms[3].pos == Approx(11.0));
  CHECK(rs.atoms[3].mass == Approx(0.5));
  REQUIRE(rs.threshold_counts.size() == 2);
  CHECK(rs.threshold_counts[0] == 1);
  CHECK(rs.threshold_counts[1] == 3);
  CHECK(rs.small_mass_sums[0] == Approx(3.5));
  CHECK(rs.small_mass_sums[1] == Approx(0.5));

  const RegraftSummary bs = bismut_summary(t, 2, eps);
  CHECK(bs.branch_len == Approx(t.height(2)));
  REQUIRE(bs.atoms.size() == 2);
  CHECK(bs.atoms[0].mass == Approx(0.5));
  CHECK(bs.atoms[1].mass == Approx(4.0));
  CHECK(bs.threshold_counts[0] == 1);
  CHECK(bs.threshold_counts[1] == 1);

  CHECK_THROWS_AS(regraft_summary(d, std::vector<double>{0.0}),
                  std::invalid_argument);
}

TEST_CASE("regraft round trip reproduces the summary", "[regraft]") {
  const std::vector<double> eps{0.1, 0.05, 0.02};
  for (std::uint32_t rep = 0; rep < 10; ++rep) {
    Rng tree_rng(101, "tree", rep);
    const VertexId n = 120;
    const auto parent =
        sample_conditioned_tree(OffspringLaw::poisson(), n, tree_rng);
    const WTree tree =
        rescale(parent, ScalingPlan::sigma_one(n, 0.1, 0.0, 2.0));
    Rng mark_rng(101, "marks", rep);
    const MarkedTree m = assign_marks(tree, 0.5, mark_rng);
    const PruneDecomposition d = decompose_classes(m);
    const auto subs = extract_class_subtrees(m, d);
    const WTree re = build_regraft_tree(d, subs);

    CHECK(re.total_mass() == Approx(tree.total_mass()).epsilon(1e-13));
    double member_len = 0.0;
    for (const PruneClass& c : d.classes) {
      for (const VertexId v : c.members) member_len += tree.edge_len(v);
    }
    CHECK(re.total_length() ==
          Approx(d.theta_total + member_len).epsilon(1e-12));

    const RegraftSummary want = regraft_summary(d, eps);
    const RegraftSummary got = bismut_summary(re, find_branch_end(re), eps);
    CHECK(got.branch_len == Approx(want.branch_len).margin(1e-12));
    REQUIRE(got.atoms.size() == want.atoms.size());
    for (std::size_t i = 0; i < got.atoms.size(); ++i) {
      CHECK(got.atoms[i].pos == Approx(want.atoms[i].pos).margin(1e-12));
      CHECK(got.atoms[i].mass == Approx(want.atoms[i].mass).margin(1e-13));
    }
    for (std::size_t k = 0; k < eps.size(); ++k) {
      CHECK(got.threshold_counts[k] == want.threshold_counts[k]);
    }
  }
}
