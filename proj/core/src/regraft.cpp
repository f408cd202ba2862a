#include "levytree/regraft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace levytree {

namespace {

constexpr double kMergeTol = 1e-15;

void count_thresholds(RegraftSummary& s, std::span<const double> thresholds) {
  s.thresholds.assign(thresholds.begin(), thresholds.end());
  s.threshold_counts.assign(thresholds.size(), 0);
  s.small_mass_sums.assign(thresholds.size(), 0.0);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double eps = thresholds[k];
    if (!(eps > 0.0)) {
      throw std::invalid_argument("summary: thresholds must be > 0");
    }
    for (const SummaryAtom& a : s.atoms) {
      if (a.mass >= eps) {
        ++s.threshold_counts[k];
      } else {
        s.small_mass_sums[k] += a.mass;
      }
    }
  }
}

}  // namespace

std::vector<WTree> extract_class_subtrees(const MarkedTree& marked,
                                          const PruneDecomposition& decomp) {
  const WTree& tree = *marked.tree;
  std::vector<std::int32_t> local(std::size_t(tree.size()), -1);
  std::vector<WTree> out;
  out.reserve(decomp.classes.size());

  for (const PruneClass& cls : decomp.classes) {
    // Members arrive in tree preorder, so a member's in-class parent is
    // numbered before it.
    const auto m = cls.members.size();
    std::vector<VertexId> parent(m + 1, kNoVertex);
    std::vector<double> edge_len(m + 1, 0.0);
    std::vector<double> vertex_mass(m + 1, 0.0);
    std::vector<double> node_mass(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      local[std::size_t(cls.members[i])] = std::int32_t(i + 1);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const VertexId v = cls.members[i];
      const VertexId p = tree.parent(v);
      const std::int32_t lp = local[std::size_t(p)];
      parent[i + 1] = (p != kNoVertex && lp >= 0) ? VertexId(lp) : 0;
      edge_len[i + 1] = tree.edge_len(v);
      vertex_mass[i + 1] = tree.vertex_mass(v);
      node_mass[i + 1] = tree.node_mass(v);
    }
    for (const VertexId v : cls.members) local[std::size_t(v)] = -1;
    out.push_back(WTree::build(std::move(parent), std::move(edge_len),
                               std::move(vertex_mass), std::move(node_mass)));
  }
  return out;
}

WTree build_regraft_tree(const PruneDecomposition& decomp,
                         std::span<const WTree> subtrees) {
  const auto k = decomp.classes.size();
  if (subtrees.size() != k) {
    throw std::invalid_argument(
        "build_regraft_tree: " + std::to_string(subtrees.size()) +
        " subtrees for " + std::to_string(k) + " classes");
  }
  const double total = decomp.theta_total;
  if (k == 0) {
    return WTree::build({kNoVertex}, {0.0}, {0.0}, {0.0});
  }

  // Distinct subdivision positions, ascending; nearby positions merge.
  std::vector<double> pos(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double p = decomp.classes[i].graft_pos;
    if (!(p >= 0.0) || p > total) {
      throw std::invalid_argument("build_regraft_tree: class " +
                                  std::to_string(i) +
                                  " graft position outside [0, Theta]");
    }
    pos[i] = p;
  }
  std::sort(pos.begin(), pos.end());
  std::vector<double> stops;  // distance from the root, excluding 0
  for (const double p : pos) {
    if (p <= kMergeTol) continue;
    if (!stops.empty() && p - stops.back() <= kMergeTol) continue;
    stops.push_back(p);
  }
  if (total > kMergeTol &&
      (stops.empty() || total - stops.back() > kMergeTol)) {
    stops.push_back(total);  // bare end of the branch
  }

  const auto n = VertexId(stops.size()) + 1;
  std::vector<VertexId> parent(static_cast<std::size_t>(n));
  std::vector<double> edge_len(std::size_t(n), 0.0);
  parent[0] = kNoVertex;
  for (VertexId v = 1; v < n; ++v) {
    parent[std::size_t(v)] = v - 1;
    edge_len[std::size_t(v)] =
        stops[std::size_t(v - 1)] - (v == 1 ? 0.0 : stops[std::size_t(v - 2)]);
  }
  WTree branch =
      WTree::build(std::move(parent), std::move(edge_len),
                   std::vector<double>(std::size_t(n), 0.0),
                   std::vector<double>(std::size_t(n), 0.0));

  // Attach vertex for a given position: the root for merged-to-zero
  // positions, else the subdivision vertex whose stop is nearest.
  const auto vertex_at = [&stops](double p) -> VertexId {
    if (stops.empty() || p <= kMergeTol) return 0;
    const auto it = std::lower_bound(stops.begin(), stops.end(), p - kMergeTol);
    if (it == stops.end()) {
      throw std::logic_error("build_regraft_tree: position beyond the branch");
    }
    return VertexId(it - stops.begin()) + 1;
  };

  std::vector<GraftSpec> specs(k);
  for (std::size_t i = 0; i < k; ++i) {
    specs[i] = GraftSpec{&subtrees[i], vertex_at(decomp.classes[i].graft_pos)};
  }
  return graft(branch, specs);
}

RegraftSummary regraft_summary(const PruneDecomposition& decomp,
                               std::span<const double> thresholds) {
  RegraftSummary s;
  s.branch_len = decomp.theta_total;
  s.atoms.reserve(decomp.classes.size());
  for (auto it = decomp.classes.rbegin(); it != decomp.classes.rend(); ++it) {
    s.atoms.push_back(SummaryAtom{it->graft_pos, it->sigma});
  }
  count_thresholds(s, thresholds);
  return s;
}

RegraftSummary bismut_summary(const WTree& tree, VertexId v,
                              std::span<const double> thresholds) {
  const SpineDecomposition spine = root_path_decomposition(tree, v);
  RegraftSummary s;
  s.branch_len = spine.height;
  s.atoms.reserve(spine.atoms.size());
  for (const SpineAtom& a : spine.atoms) {
    s.atoms.push_back(SummaryAtom{a.h, a.mass});
  }
  count_thresholds(s, thresholds);
  return s;
}

}  // namespace levytree
