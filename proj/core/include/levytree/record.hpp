#pragma once
// Mark process on a weighted tree, record values theta, the pruning
// decomposition into constant-theta classes, and the discrete cut counters.

#include <cstdint>
#include <span>
#include <vector>

#include "levytree/rng.hpp"
#include "levytree/tree.hpp"

namespace levytree {

/// First-mark times and derived record values. edge_mark[v] is the first
/// mark on the edge above v, node_mark[v] the first mark at vertex v; +inf
/// stands for "never" (rate 0, or the root's edge). theta(root) = +inf and
/// theta(v) = min(theta(parent), node_mark[parent], edge_mark[v]), so theta
/// is non-increasing along every root-to-leaf path.
struct MarkedTree {
  const WTree* tree = nullptr;
  std::vector<double> edge_mark;
  std::vector<double> node_mark;
  std::vector<double> theta;

  /// Computes theta from caller-supplied mark arrays. Mark entries must be
  /// non-negative (+inf allowed); the root's edge mark is forced to +inf.
  static MarkedTree from_marks(const WTree& tree,
                               std::vector<double> edge_mark,
                               std::vector<double> node_mark);
};

/// Independent exponential first marks: rate 2*beta*edge_len[v] on the edge
/// above v, rate node_mass[v] at v. Draws edge marks in vertex order, then
/// node marks; rate-0 clocks consume no randomness.
MarkedTree assign_marks(const WTree& tree, double beta, Rng& rng);

/// sigma_q: total vertex mass of {v : theta(v) >= q}. Non-increasing and
/// right-continuous in q; sigma_0 is the tree's total mass.
double pruned_mass(const MarkedTree& marked, double q);

/// Theta_q = sum_v vertex_mass[v] * max(0, theta(v) - q), the mass integral
/// of the remaining record time. A positive-mass vertex with theta = +inf
/// makes the integral infinite and is rejected.
double theta_integral(const MarkedTree& marked, double q);

struct PruneClass {
  double theta;      // common record value, the class's removal time
  VertexId attach;   // topmost member, or the branch point for a node mark
  double sigma;      // total member mass
  double graft_pos;  // Theta at level theta: sum_j sigma_j (theta_j - theta)
                     // over classes j removed later (theta_j > theta)
  std::vector<VertexId> members;
};

struct PruneDecomposition {
  std::vector<PruneClass> classes;  // ascending theta
  double theta_total = 0.0;         // Theta_0, the regraft branch length
  double sigma_total = 0.0;         // mass covered by the classes
};

/// Splits the finite-theta vertices into maximal constant-theta classes.
/// Sibling branches capped by the same node mark at their common parent
/// form one class (the removed piece of that single mark). Two distinct
/// classes with exactly equal theta indicate clock reuse and abort.
PruneDecomposition decompose_classes(const MarkedTree& marked);

/// Repeated uniform pick among surviving edges, discarding the picked
/// edge's subtree side, until the root is isolated; returns the number of
/// picks. A 1-vertex tree has no edges and returns 0.
std::int64_t count_cuts_edges(std::span<const VertexId> parent, Rng& rng);

/// Vertex variant: a pick removes the picked edge's parent-side vertex
/// together with everything below it. Counting stops when the root itself
/// is removed or no edges remain.
std::int64_t count_cuts_vertices(std::span<const VertexId> parent, Rng& rng);

}  // namespace levytree
