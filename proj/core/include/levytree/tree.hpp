#pragma once
// Rooted weighted trees: parent-array trees with positive edge lengths, a
// non-negative mass on every vertex (the discrete rendering of the leaf-mass
// measure) and an optional branch-point mass used as a node-mark rate.
// Instances are validated and immutable after construction.

#include <cstdint>
#include <span>
#include <vector>

#include "levytree/rng.hpp"

namespace levytree {

using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

class WTree {
 public:
  /// Validates the arrays (single root, acyclic, positive edge lengths off
  /// the root, zero root edge and root mass, non-negative masses) and
  /// precomputes depths, heights and a preorder. node_mass may be empty,
  /// meaning all zeros. Errors name the offending vertex index.
  static WTree build(std::vector<VertexId> parent,
                     std::vector<double> edge_len,
                     std::vector<double> vertex_mass,
                     std::vector<double> node_mass = {});

  VertexId root() const { return root_; }
  VertexId size() const { return VertexId(parent_.size()); }

  VertexId parent(VertexId v) const { return parent_[check(v)]; }
  double edge_len(VertexId v) const { return edge_len_[check(v)]; }
  double vertex_mass(VertexId v) const { return vertex_mass_[check(v)]; }
  double node_mass(VertexId v) const { return node_mass_[check(v)]; }
  std::int32_t depth(VertexId v) const { return depth_[check(v)]; }
  /// Metric distance from the root.
  double height(VertexId v) const { return height_[check(v)]; }

  std::span<const VertexId> children(VertexId v) const;
  /// Parents precede children; children appear in ascending-id order.
  std::span<const VertexId> preorder() const { return preorder_; }

  double total_mass() const { return total_mass_; }
  double total_length() const { return total_length_; }

  const std::vector<VertexId>& parent_array() const { return parent_; }
  const std::vector<double>& edge_len_array() const { return edge_len_; }
  const std::vector<double>& vertex_mass_array() const { return vertex_mass_; }
  const std::vector<double>& node_mass_array() const { return node_mass_; }

 private:
  WTree() = default;
  VertexId check(VertexId v) const;

  std::vector<VertexId> parent_;
  std::vector<double> edge_len_;
  std::vector<double> vertex_mass_;
  std::vector<double> node_mass_;
  VertexId root_ = kNoVertex;

  std::vector<std::int32_t> depth_;
  std::vector<double> height_;
  std::vector<VertexId> preorder_;
  std::vector<std::int32_t> child_offset_;  // CSR over children_
  std::vector<VertexId> children_;
  double total_mass_ = 0.0;
  double total_length_ = 0.0;
};

/// Most recent common ancestor.
VertexId mrca(const WTree& tree, VertexId u, VertexId v);

/// Tree metric d(u, v) = h(u) + h(v) - 2 h(mrca(u, v)).
double distance(const WTree& tree, VertexId u, VertexId v);

struct GraftSpec {
  const WTree* subtree;
  VertexId attach;  // vertex of the base tree
};

/// Grafts each subtree by identifying its root with the attach vertex: the
/// attach vertex gains the subtree root's vertex and node mass, and the
/// subtree's non-root vertices are appended (per graft, in subtree preorder)
/// with their edge lengths and masses preserved. Base vertices keep their
/// ids.
WTree graft(const WTree& base, std::span<const GraftSpec> grafts);

struct SpineAtom {
  double h;        // height of the attach point on the root path
  double mass;     // hanging-component masses plus the attach vertex's own
  VertexId attach;
  std::vector<VertexId> members;  // component vertices; filled on request
};

struct SpineDecomposition {
  VertexId tip;
  double height;  // H = height(tip)
  std::vector<SpineAtom> atoms;  // ascending h
};

/// Decomposition of the tree along the root path to any vertex v: one atom
/// per path vertex that carries mass or hanging components (components at v
/// itself show up at h = H). v's own mass stays outside the atoms, so
/// sum(atom masses) + vertex_mass(v) = total_mass.
SpineDecomposition root_path_decomposition(const WTree& tree, VertexId v,
                                           bool with_members = false);

/// Same, restricted to leaves: v must have no children.
SpineDecomposition spine_decomposition(const WTree& tree, VertexId leaf,
                                       bool with_members = false);

/// Vertex drawn with probability proportional to vertex mass. Requires
/// total_mass > 0.
VertexId sample_vertex_by_mass(const WTree& tree, Rng& rng);

}  // namespace levytree
