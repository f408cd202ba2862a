#include "levytree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace levytree {

namespace {

[[noreturn]] void bad_vertex(const char* what, VertexId v) {
  throw std::invalid_argument(std::string("tree: ") + what + " at vertex " +
                              std::to_string(v));
}

}  // namespace

VertexId WTree::check(VertexId v) const {
  if (v < 0 || v >= size()) bad_vertex("vertex index out of range", v);
  return v;
}

std::span<const VertexId> WTree::children(VertexId v) const {
  check(v);
  const auto lo = child_offset_[v];
  const auto hi = child_offset_[v + 1];
  return {children_.data() + lo, std::size_t(hi - lo)};
}

WTree WTree::build(std::vector<VertexId> parent, std::vector<double> edge_len,
                   std::vector<double> vertex_mass,
                   std::vector<double> node_mass) {
  const auto n = VertexId(parent.size());
  if (n == 0) throw std::invalid_argument("tree: must have at least 1 vertex");
  if (node_mass.empty()) node_mass.assign(std::size_t(n), 0.0);
  if (edge_len.size() != std::size_t(n) ||
      vertex_mass.size() != std::size_t(n) ||
      node_mass.size() != std::size_t(n)) {
    throw std::invalid_argument("tree: array lengths disagree");
  }

  WTree t;
  t.parent_ = std::move(parent);
  t.edge_len_ = std::move(edge_len);
  t.vertex_mass_ = std::move(vertex_mass);
  t.node_mass_ = std::move(node_mass);

  t.root_ = kNoVertex;
  for (VertexId v = 0; v < n; ++v) {
    const VertexId p = t.parent_[v];
    if (p == kNoVertex) {
      if (t.root_ != kNoVertex) bad_vertex("second root", v);
      t.root_ = v;
    } else if (p < 0 || p >= n) {
      bad_vertex("parent index out of range", v);
    } else if (p == v) {
      bad_vertex("vertex is its own parent", v);
    }
  }
  if (t.root_ == kNoVertex) {
    throw std::invalid_argument("tree: no root (no vertex with parent -1)");
  }

  // Depths via memoized parent walks; a revisit inside the current walk is a
  // cycle.
  t.depth_.assign(std::size_t(n), -1);
  t.depth_[t.root_] = 0;
  std::vector<VertexId> chain;
  for (VertexId v = 0; v < n; ++v) {
    if (t.depth_[v] >= 0) continue;
    chain.clear();
    VertexId w = v;
    while (t.depth_[w] < 0) {
      if (std::find(chain.begin(), chain.end(), w) != chain.end()) {
        bad_vertex("parent cycle", w);
      }
      chain.push_back(w);
      w = t.parent_[w];
    }
    std::int32_t d = t.depth_[w];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      t.depth_[*it] = ++d;
    }
  }

  for (VertexId v = 0; v < n; ++v) {
    const bool is_root = v == t.root_;
    const double len = t.edge_len_[v];
    if (!std::isfinite(len)) bad_vertex("non-finite edge length", v);
    if (is_root ? len != 0.0 : len <= 0.0) {
      bad_vertex(is_root ? "root edge length must be 0"
                         : "edge length must be > 0",
                 v);
    }
    const double m = t.vertex_mass_[v];
    if (!std::isfinite(m) || m < 0.0) bad_vertex("bad vertex mass", v);
    if (is_root && m != 0.0) bad_vertex("root mass must be 0", v);
    const double nm = t.node_mass_[v];
    if (!std::isfinite(nm) || nm < 0.0) bad_vertex("bad node mass", v);
  }

  // Children in ascending-id order (CSR), then preorder and heights.
  t.child_offset_.assign(std::size_t(n) + 1, 0);
  for (VertexId v = 0; v < n; ++v) {
    if (t.parent_[v] != kNoVertex) ++t.child_offset_[t.parent_[v] + 1];
  }
  for (VertexId v = 0; v < n; ++v) {
    t.child_offset_[v + 1] += t.child_offset_[v];
  }
  t.children_.assign(std::size_t(n) - 1, kNoVertex);
  {
    std::vector<std::int32_t> cursor(t.child_offset_.begin(),
                                     t.child_offset_.end() - 1);
    for (VertexId v = 0; v < n; ++v) {
      if (t.parent_[v] != kNoVertex) {
        t.children_[std::size_t(cursor[t.parent_[v]]++)] = v;
      }
    }
  }

  t.height_.assign(std::size_t(n), 0.0);
  t.preorder_.clear();
  t.preorder_.reserve(std::size_t(n));
  std::vector<VertexId> stack{t.root_};
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    t.preorder_.push_back(v);
    if (v != t.root_) {
      t.height_[v] = t.height_[t.parent_[v]] + t.edge_len_[v];
    }
    const auto kids = t.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      stack.push_back(*it);
    }
  }

  t.total_mass_ = 0.0;
  t.total_length_ = 0.0;
  for (VertexId v = 0; v < n; ++v) {
    t.total_mass_ += t.vertex_mass_[v];
    t.total_length_ += t.edge_len_[v];
  }
  return t;
}

VertexId mrca(const WTree& tree, VertexId u, VertexId v) {
  tree.depth(u);  // bounds checks
  tree.depth(v);
  while (tree.depth(u) > tree.depth(v)) u = tree.parent(u);
  while (tree.depth(v) > tree.depth(u)) v = tree.parent(v);
  while (u != v) {
    u = tree.parent(u);
    v = tree.parent(v);
  }
  return u;
}

double distance(const WTree& tree, VertexId u, VertexId v) {
  return tree.height(u) + tree.height(v) - 2.0 * tree.height(mrca(tree, u, v));
}

WTree graft(const WTree& base, std::span<const GraftSpec> grafts) {
  for (std::size_t i = 0; i < grafts.size(); ++i) {
    if (grafts[i].subtree == nullptr) {
      throw std::invalid_argument("graft: null subtree at slot " +
                                  std::to_string(i));
    }
    if (grafts[i].attach < 0 || grafts[i].attach >= base.size()) {
      throw std::invalid_argument("graft: attach vertex out of range at slot " +
                                  std::to_string(i));
    }
  }
  std::vector<VertexId> parent = base.parent_array();
  std::vector<double> edge_len = base.edge_len_array();
  std::vector<double> vertex_mass = base.vertex_mass_array();
  std::vector<double> node_mass = base.node_mass_array();

  for (const auto& g : grafts) {
    const WTree& sub = *g.subtree;
    const VertexId sub_root = sub.root();
    vertex_mass[g.attach] += sub.vertex_mass(sub_root);
    node_mass[g.attach] += sub.node_mass(sub_root);
    // Map subtree ids to output ids; the subtree root becomes the attach
    // vertex, other vertices are appended in subtree preorder.
    std::vector<VertexId> map(std::size_t(sub.size()), kNoVertex);
    map[sub_root] = g.attach;
    for (const VertexId v : sub.preorder()) {
      if (v == sub_root) continue;
      map[v] = VertexId(parent.size());
      parent.push_back(map[sub.parent(v)]);
      edge_len.push_back(sub.edge_len(v));
      vertex_mass.push_back(sub.vertex_mass(v));
      node_mass.push_back(sub.node_mass(v));
    }
  }
  return WTree::build(std::move(parent), std::move(edge_len),
                      std::move(vertex_mass), std::move(node_mass));
}

SpineDecomposition root_path_decomposition(const WTree& tree, VertexId v,
                                           bool with_members) {
  tree.depth(v);  // bounds check
  const auto n = std::size_t(tree.size());

  // Subtree masses in one reverse-preorder pass.
  std::vector<double> subtree_mass(n, 0.0);
  const auto order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    subtree_mass[*it] += tree.vertex_mass(*it);
    if (*it != tree.root()) subtree_mass[tree.parent(*it)] += subtree_mass[*it];
  }

  std::vector<char> on_path(n, 0);
  for (VertexId w = v;; w = tree.parent(w)) {
    on_path[w] = 1;
    if (w == tree.root()) break;
  }

  SpineDecomposition out;
  out.tip = v;
  out.height = tree.height(v);

  // Path vertices in root-to-tip order.
  std::vector<VertexId> path;
  for (VertexId w = v;; w = tree.parent(w)) {
    path.push_back(w);
    if (w == tree.root()) break;
  }
  std::reverse(path.begin(), path.end());

  for (const VertexId w : path) {
    double mass = (w == v) ? 0.0 : tree.vertex_mass(w);
    bool has_component = false;
    std::vector<VertexId> members;
    for (const VertexId c : tree.children(w)) {
      if (on_path[c]) continue;
      has_component = true;
      mass += subtree_mass[c];
      if (with_members) {
        // Collect the hanging component rooted at c.
        std::vector<VertexId> stack{c};
        while (!stack.empty()) {
          const VertexId x = stack.back();
          stack.pop_back();
          members.push_back(x);
          for (const VertexId k : tree.children(x)) stack.push_back(k);
        }
      }
    }
    if (!has_component && mass == 0.0) continue;
    out.atoms.push_back(
        SpineAtom{tree.height(w), mass, w, std::move(members)});
  }
  return out;
}

SpineDecomposition spine_decomposition(const WTree& tree, VertexId leaf,
                                       bool with_members) {
  if (!tree.children(leaf).empty()) {
    throw std::domain_error("spine_decomposition: vertex " +
                            std::to_string(leaf) + " has children");
  }
  return root_path_decomposition(tree, leaf, with_members);
}

VertexId sample_vertex_by_mass(const WTree& tree, Rng& rng) {
  const double total = tree.total_mass();
  if (!(total > 0.0)) {
    throw std::domain_error("sample_vertex_by_mass: total mass is zero");
  }
  const double target = rng.uniform() * total;
  double running = 0.0;
  VertexId last_positive = kNoVertex;
  for (VertexId v = 0; v < tree.size(); ++v) {
    const double m = tree.vertex_mass(v);
    if (m <= 0.0) continue;
    last_positive = v;
    running += m;
    if (running > target) return v;
  }
  return last_positive;  // guards the running-sum rounding edge
}

}  // namespace levytree
