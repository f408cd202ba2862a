#pragma once
// Cut-and-regraft construction: standalone class subtrees, the regrafted
// tree (a mass-free branch of length Theta with the classes hung at their
// graft positions), and the summary statistics compared between the regraft
// and spine pictures.

#include <cstdint>
#include <span>
#include <vector>

#include "levytree/record.hpp"
#include "levytree/tree.hpp"

namespace levytree {

/// Standalone copies of the class subtrees, aligned with decomp.classes.
/// Subtree i is rooted at a fresh zero-mass vertex standing for the cut
/// point; the members hang below it with their original edge lengths,
/// masses and node masses.
std::vector<WTree> extract_class_subtrees(const MarkedTree& marked,
                                          const PruneDecomposition& decomp);

/// The regrafted tree: a zero-mass path of total length theta_total from a
/// fresh root, subdivided at the graft positions (distance from the root),
/// with subtree i grafted at position graft_pos_i and a bare end vertex at
/// theta_total. Positions closer than 1e-15 share one subdivision vertex.
/// subtrees must align with decomp.classes, each rooted at a zero-mass
/// vertex.
WTree build_regraft_tree(const PruneDecomposition& decomp,
                         std::span<const WTree> subtrees);

struct SummaryAtom {
  double pos;   // distance from the branch root, or spine height
  double mass;
};

/// Common summary shape for both sides of the distributional comparison:
/// the branch length (Theta, or the spine height H) with the (position,
/// mass) atoms, plus per-threshold atom counts and small-mass tails.
struct RegraftSummary {
  double branch_len = 0.0;
  std::vector<SummaryAtom> atoms;              // ascending pos
  std::vector<double> thresholds;              // as supplied
  std::vector<std::int64_t> threshold_counts;  // #{atoms with mass >= eps}
  std::vector<double> small_mass_sums;         // sum of masses <= eps
};

RegraftSummary regraft_summary(const PruneDecomposition& decomp,
                               std::span<const double> thresholds);

/// Spine-side summary at any vertex (mass-weighted draws may land on
/// internal vertices): branch_len is the vertex height, atoms come from the
/// root-path decomposition.
RegraftSummary bismut_summary(const WTree& tree, VertexId v,
                              std::span<const double> thresholds);

}  // namespace levytree
