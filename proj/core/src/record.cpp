#include "levytree/record.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace levytree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mark_array(const std::vector<double>& marks, std::size_t n,
                      const char* what) {
  if (marks.size() != n) {
    throw std::invalid_argument(std::string("marked tree: ") + what +
                                " size disagrees with the tree");
  }
  for (std::size_t v = 0; v < n; ++v) {
    const double t = marks[v];
    if (std::isnan(t) || t < 0.0) {
      throw std::invalid_argument(std::string("marked tree: ") + what +
                                  " at vertex " + std::to_string(v) +
                                  " must be >= 0 or +inf");
    }
  }
}

// Parent array validation shared by the cut counters: exactly one root,
// parents in range, no cycles. Returns the root.
VertexId check_parent_array(std::span<const VertexId> parent) {
  const auto n = VertexId(parent.size());
  if (n < 1) throw std::invalid_argument("cut counter: empty parent array");
  VertexId root = kNoVertex;
  for (VertexId v = 0; v < n; ++v) {
    const VertexId p = parent[std::size_t(v)];
    if (p == kNoVertex) {
      if (root != kNoVertex) {
        throw std::invalid_argument("cut counter: two roots in parent array");
      }
      root = v;
    } else if (p < 0 || p >= n || p == v) {
      throw std::invalid_argument("cut counter: bad parent at vertex " +
                                  std::to_string(v));
    }
  }
  if (root == kNoVertex) {
    throw std::invalid_argument("cut counter: parent array has no root");
  }
  std::vector<std::int32_t> depth(std::size_t(n), -1);
  depth[std::size_t(root)] = 0;
  std::vector<VertexId> chain;
  for (VertexId v = 0; v < n; ++v) {
    chain.clear();
    VertexId w = v;
    while (depth[std::size_t(w)] < 0) {
      chain.push_back(w);
      w = parent[std::size_t(w)];
      if (std::int64_t(chain.size()) > std::int64_t(n)) {
        throw std::invalid_argument("cut counter: cycle in parent array");
      }
    }
    std::int32_t d = depth[std::size_t(w)];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      depth[std::size_t(*it)] = ++d;
    }
  }
  return root;
}

struct ChildrenIndex {
  std::vector<std::int32_t> offset;  // n + 1 entries
  std::vector<VertexId> child;
};

ChildrenIndex index_children(std::span<const VertexId> parent) {
  const auto n = std::size_t(parent.size());
  ChildrenIndex idx;
  idx.offset.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != kNoVertex) ++idx.offset[std::size_t(parent[v]) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) idx.offset[i + 1] += idx.offset[i];
  idx.child.assign(std::size_t(idx.offset[n]), kNoVertex);
  std::vector<std::int32_t> cursor(idx.offset.begin(), idx.offset.end() - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != kNoVertex) {
      idx.child[std::size_t(cursor[std::size_t(parent[v])]++)] = VertexId(v);
    }
  }
  return idx;
}

// Marks v and every descendant dead; returns nothing. Touches each vertex
// at most once across all calls because dead subtrees are never re-entered.
void kill_subtree(VertexId v, const ChildrenIndex& idx,
                  std::vector<char>& alive, std::vector<VertexId>& stack) {
  stack.clear();
  stack.push_back(v);
  while (!stack.empty()) {
    const VertexId w = stack.back();
    stack.pop_back();
    if (!alive[std::size_t(w)]) continue;
    alive[std::size_t(w)] = 0;
    for (std::int32_t i = idx.offset[std::size_t(w)];
         i < idx.offset[std::size_t(w) + 1]; ++i) {
      stack.push_back(idx.child[std::size_t(i)]);
    }
  }
}

// Uniform random permutation of the non-root vertices (each stands for the
// edge above it). Scanning it and skipping dead edges draws the same law as
// repeated uniform picks among the surviving edges.
std::vector<VertexId> shuffled_edges(std::span<const VertexId> parent,
                                     Rng& rng) {
  std::vector<VertexId> edges;
  edges.reserve(parent.size());
  for (VertexId v = 0; v < VertexId(parent.size()); ++v) {
    if (parent[std::size_t(v)] != kNoVertex) edges.push_back(v);
  }
  for (std::size_t i = edges.size(); i > 1; --i) {
    std::swap(edges[i - 1], edges[std::size_t(rng.uniform_below(i))]);
  }
  return edges;
}

}  // namespace

MarkedTree MarkedTree::from_marks(const WTree& tree,
                                  std::vector<double> edge_mark,
                                  std::vector<double> node_mark) {
  const auto n = std::size_t(tree.size());
  check_mark_array(edge_mark, n, "edge_mark");
  check_mark_array(node_mark, n, "node_mark");

  MarkedTree m;
  m.tree = &tree;
  m.edge_mark = std::move(edge_mark);
  m.node_mark = std::move(node_mark);
  m.edge_mark[std::size_t(tree.root())] = kInf;
  m.theta.assign(n, kInf);
  for (const VertexId v : tree.preorder()) {
    if (v == tree.root()) continue;
    const VertexId p = tree.parent(v);
    m.theta[std::size_t(v)] =
        std::min({m.theta[std::size_t(p)], m.node_mark[std::size_t(p)],
                  m.edge_mark[std::size_t(v)]});
  }
  return m;
}

MarkedTree assign_marks(const WTree& tree, double beta, Rng& rng) {
  if (!(beta >= 0.0)) {
    throw std::domain_error("assign_marks: beta must be >= 0");
  }
  const auto n = std::size_t(tree.size());
  std::vector<double> edge_mark(n, kInf);
  std::vector<double> node_mark(n, kInf);
  for (VertexId v = 0; v < VertexId(n); ++v) {
    if (v != tree.root()) {
      edge_mark[std::size_t(v)] = rng.exponential(2.0 * beta * tree.edge_len(v));
    }
  }
  for (VertexId v = 0; v < VertexId(n); ++v) {
    node_mark[std::size_t(v)] = rng.exponential(tree.node_mass(v));
  }
  return MarkedTree::from_marks(tree, std::move(edge_mark),
                                std::move(node_mark));
}

double pruned_mass(const MarkedTree& marked, double q) {
  if (!(q >= 0.0)) throw std::domain_error("pruned_mass: q must be >= 0");
  const WTree& tree = *marked.tree;
  double sum = 0.0;
  for (VertexId v = 0; v < tree.size(); ++v) {
    if (marked.theta[std::size_t(v)] >= q) sum += tree.vertex_mass(v);
  }
  return sum;
}

double theta_integral(const MarkedTree& marked, double q) {
  if (!(q >= 0.0)) throw std::domain_error("theta_integral: q must be >= 0");
  const WTree& tree = *marked.tree;
  double sum = 0.0;
  for (VertexId v = 0; v < tree.size(); ++v) {
    const double m = tree.vertex_mass(v);
    if (m <= 0.0) continue;
    const double t = marked.theta[std::size_t(v)];
    if (t == kInf) {
      throw std::domain_error("theta_integral: vertex " + std::to_string(v) +
                              " carries mass but is never marked");
    }
    if (t > q) sum += m * (t - q);
  }
  return sum;
}

PruneDecomposition decompose_classes(const MarkedTree& marked) {
  const WTree& tree = *marked.tree;
  const auto n = std::size_t(tree.size());

  std::vector<std::int32_t> class_of(n, -1);
  std::vector<PruneClass> classes;
  // One class per node mark that binds at least one child branch, keyed by
  // the marked branch point.
  std::unordered_map<VertexId, std::int32_t> node_class;

  for (const VertexId v : tree.preorder()) {
    if (v == tree.root()) continue;
    const double t = marked.theta[std::size_t(v)];
    if (t == kInf) {
      if (tree.vertex_mass(v) > 0.0) {
        throw std::domain_error("decompose_classes: vertex " +
                                std::to_string(v) +
                                " carries mass but is never marked");
      }
      continue;
    }
    const VertexId p = tree.parent(v);
    std::int32_t id;
    if (p != tree.root() && class_of[std::size_t(p)] >= 0 &&
        t == marked.theta[std::size_t(p)]) {
      id = class_of[std::size_t(p)];
    } else if (t == marked.node_mark[std::size_t(p)]) {
      const auto it = node_class.find(p);
      if (it != node_class.end()) {
        id = it->second;
      } else {
        id = std::int32_t(classes.size());
        classes.push_back(PruneClass{t, p, 0.0, 0.0, {}});
        node_class.emplace(p, id);
      }
    } else {
      id = std::int32_t(classes.size());
      classes.push_back(PruneClass{t, v, 0.0, 0.0, {}});
    }
    class_of[std::size_t(v)] = id;
    classes[std::size_t(id)].sigma += tree.vertex_mass(v);
    classes[std::size_t(id)].members.push_back(v);
  }

  std::sort(classes.begin(), classes.end(),
            [](const PruneClass& a, const PruneClass& b) {
              return a.theta < b.theta;
            });
  for (std::size_t i = 1; i < classes.size(); ++i) {
    if (classes[i].theta == classes[i - 1].theta) {
      throw std::runtime_error(
          "decompose_classes: two classes share removal time " +
          std::to_string(classes[i].theta) + " (clock reuse)");
    }
  }

  // Graft positions by one pass from the latest-removed class down:
  // Theta at level theta_i grows by the mass removed after theta_i times
  // the time gap. The running form keeps the sequence non-negative and
  // monotone under rounding.
  PruneDecomposition out;
  double pos = 0.0;
  double mass_after = 0.0;
  double theta_prev = 0.0;
  for (auto it = classes.rbegin(); it != classes.rend(); ++it) {
    if (mass_after > 0.0) pos += mass_after * (theta_prev - it->theta);
    it->graft_pos = pos;
    mass_after += it->sigma;
    theta_prev = it->theta;
    out.sigma_total += it->sigma;
  }
  out.theta_total =
      classes.empty() ? 0.0 : pos + mass_after * theta_prev;
  out.classes = std::move(classes);
  return out;
}

std::int64_t count_cuts_edges(std::span<const VertexId> parent, Rng& rng) {
  check_parent_array(parent);
  if (parent.size() <= 1) return 0;
  const ChildrenIndex idx = index_children(parent);
  std::vector<char> alive(parent.size(), 1);
  std::vector<VertexId> stack;
  std::int64_t cuts = 0;
  for (const VertexId v : shuffled_edges(parent, rng)) {
    if (!alive[std::size_t(v)]) continue;
    ++cuts;
    kill_subtree(v, idx, alive, stack);
  }
  return cuts;
}

std::int64_t count_cuts_vertices(std::span<const VertexId> parent, Rng& rng) {
  const VertexId root = check_parent_array(parent);
  if (parent.size() <= 1) return 0;
  const ChildrenIndex idx = index_children(parent);
  std::vector<char> alive(parent.size(), 1);
  std::vector<VertexId> stack;
  std::int64_t cuts = 0;
  for (const VertexId v : shuffled_edges(parent, rng)) {
    if (!alive[std::size_t(v)]) continue;
    ++cuts;
    const VertexId p = parent[std::size_t(v)];
    if (p == root) break;
    kill_subtree(p, idx, alive, stack);
  }
  return cuts;
}

}  // namespace levytree
