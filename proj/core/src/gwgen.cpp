#include "levytree/gwgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levytree {

namespace {

// Cumulative mean-1 Poisson table; the omitted tail beyond the last entry
// is below 1e-19.
constexpr int kPoissonTableSize = 24;

const std::vector<double>& poisson_cumulative() {
  static const std::vector<double> table = [] {
    std::vector<double> cum(kPoissonTableSize);
    double pk = std::exp(-1.0);
    double acc = 0.0;
    for (int k = 0; k < kPoissonTableSize; ++k) {
      if (k > 0) pk /= double(k);
      acc += pk;
      cum[std::size_t(k)] = acc;
    }
    return cum;
  }();
  return table;
}

}  // namespace

OffspringLaw OffspringLaw::poisson() {
  OffspringLaw law;
  law.kind_ = Kind::poisson;
  return law;
}

OffspringLaw OffspringLaw::geometric() {
  OffspringLaw law;
  law.kind_ = Kind::geometric;
  return law;
}

OffspringLaw OffspringLaw::stable_tail(double gamma, std::int64_t n_max) {
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw std::invalid_argument(
        "offspring: stable_tail gamma must lie in (1, 2)");
  }
  if (n_max < 2) {
    throw std::invalid_argument("offspring: stable_tail n_max must be >= 2");
  }
  OffspringLaw law;
  law.kind_ = Kind::stable_tail;
  law.gamma_ = gamma;
  law.n_max_ = n_max;

  // p_k = c k^{-1-gamma} on [2, n_max]; criticality (mean 1) fixes
  // c = 1/sum k^{-gamma}, normalization fixes p_0.
  long double weight_sum = 0.0L;   // sum k^{-1-gamma}
  long double mean_sum = 0.0L;     // sum k^{-gamma}
  for (std::int64_t k = 2; k <= n_max; ++k) {
    const long double w = std::pow((long double)(k), -(long double)(1.0 + gamma));
    weight_sum += w;
    mean_sum += w * (long double)(k);
  }
  law.coeff_ = double(1.0L / mean_sum);
  law.p0_ = double(1.0L - weight_sum / mean_sum);

  law.cumulative_.resize(std::size_t(n_max - 1));
  long double acc = law.p0_;
  for (std::int64_t k = 2; k <= n_max; ++k) {
    acc += (long double)(law.coeff_) *
           std::pow((long double)(k), -(long double)(1.0 + gamma));
    law.cumulative_[std::size_t(k - 2)] = double(acc);
  }
  return law;
}

std::string OffspringLaw::name() const {
  switch (kind_) {
    case Kind::poisson:
      return "poisson";
    case Kind::geometric:
      return "geometric";
    case Kind::stable_tail:
      return "stable_tail";
  }
  return "unknown";
}

double OffspringLaw::pmf(std::int64_t k) const {
  if (k < 0) return 0.0;
  switch (kind_) {
    case Kind::poisson: {
      double p = std::exp(-1.0);
      for (std::int64_t i = 1; i <= k; ++i) p /= double(i);
      return p;
    }
    case Kind::geometric:
      return k > 62 ? std::pow(0.5, double(k + 1)) : std::ldexp(1.0, -int(k + 1));
    case Kind::stable_tail:
      if (k == 0) return p0_;
      if (k == 1 || k > n_max_) return 0.0;
      return coeff_ * std::pow(double(k), -(1.0 + gamma_));
  }
  return 0.0;
}

double OffspringLaw::mean() const {
  switch (kind_) {
    case Kind::poisson:
    case Kind::geometric:
      return 1.0;
    case Kind::stable_tail: {
      long double m = 0.0L;
      for (std::int64_t k = 2; k <= n_max_; ++k) {
        m += (long double)(k) * (long double)(pmf(k));
      }
      return double(m);
    }
  }
  return 0.0;
}

double OffspringLaw::gamma() const {
  if (kind_ != Kind::stable_tail) {
    throw std::domain_error("offspring: gamma only defined for stable_tail");
  }
  return gamma_;
}

std::int64_t OffspringLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::poisson: {
      const auto& cum = poisson_cumulative();
      const double u = rng.uniform();
      for (std::size_t k = 0; k < cum.size(); ++k) {
        if (u < cum[k]) return std::int64_t(k);
      }
      return kPoissonTableSize;  // probability < 1e-19
    }
    case Kind::geometric: {
      // Trailing zero bits of a uniform word: P(k) = 2^{-(k+1)}.
      const std::uint64_t bits = rng.next_u64();
      return bits == 0 ? 64 : std::countr_zero(bits);
    }
    case Kind::stable_tail: {
      const double u = rng.uniform();
      if (u < p0_) return 0;
      const auto it =
          std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) return n_max_;
      return 2 + std::int64_t(it - cumulative_.begin());
    }
  }
  return 0;
}

std::vector<VertexId> sample_conditioned_tree(const OffspringLaw& law,
                                              VertexId n, Rng& rng) {
  if (n < 1) {
    throw std::invalid_argument("sample_conditioned_tree: n must be >= 1");
  }
  if (n == 1) return {kNoVertex};

  const std::int64_t target = std::int64_t(n) - 1;
  std::vector<std::int32_t> xi(static_cast<std::size_t>(n));
  for (;;) {
    std::int64_t sum = 0;
    bool ok = true;
    for (VertexId i = 0; i < n; ++i) {
      const std::int64_t k = law.sample(rng);
      xi[std::size_t(i)] = std::int32_t(k);
      sum += k;
      if (sum > target) {  // cannot recover; redraw the sequence
        ok = false;
        break;
      }
    }
    if (ok && sum == target) break;
  }

  // First prefix minimum of the Lukasiewicz steps xi - 1; rotating to start
  // right after it is the unique rotation that stays non-negative until the
  // final step.
  std::int64_t s = 0;
  std::int64_t min_s = 0;
  VertexId argmin = 0;
  for (VertexId j = 0; j < n; ++j) {
    s += xi[std::size_t(j)] - 1;
    if (s < min_s) {
      min_s = s;
      argmin = j + 1;
    }
  }
  const VertexId start = argmin % n;

  // Preorder decode of the rotated offspring sequence.
  std::vector<VertexId> parent(std::size_t(n), kNoVertex);
  std::vector<std::pair<VertexId, std::int32_t>> stack;
  stack.reserve(64);
  stack.emplace_back(0, xi[std::size_t(start)]);
  for (VertexId i = 1; i < n; ++i) {
    while (!stack.empty() && stack.back().second == 0) stack.pop_back();
    if (stack.empty()) {
      throw std::runtime_error(
          "sample_conditioned_tree: internal rotation invariant violated");
    }
    parent[std::size_t(i)] = stack.back().first;
    --stack.back().second;
    stack.emplace_back(i, xi[std::size_t((start + i) % n)]);
  }
  return parent;
}

double total_progeny_check(const OffspringLaw& law, std::int64_t n) {
  if (n < 1 || n > 8) {
    throw std::invalid_argument(
        "total_progeny_check: n must lie in [1, 8] (exact convolution "
        "oracle)");
  }
  const std::int64_t target = n - 1;
  std::vector<double> dist{1.0};  // point mass at sum 0
  for (std::int64_t rep = 0; rep < n; ++rep) {
    std::vector<double> next(std::size_t(target) + 1, 0.0);
    for (std::size_t sum = 0; sum < dist.size(); ++sum) {
      if (dist[sum] == 0.0) continue;
      for (std::int64_t k = 0; sum + std::size_t(k) <= std::size_t(target);
           ++k) {
        next[sum + std::size_t(k)] += dist[sum] * law.pmf(k);
      }
    }
    dist = std::move(next);
  }
  return dist[std::size_t(target)] / double(n);
}

ScalingPlan ScalingPlan::sigma_one(VertexId n, double edge_scale,
                                   double node_mass_scale, double gamma) {
  if (n < 2) throw std::invalid_argument("scaling plan: n must be >= 2");
  return ScalingPlan{n, edge_scale, 1.0 / double(n - 1), node_mass_scale,
                     gamma};
}

WTree rescale(std::span<const VertexId> parent, const ScalingPlan& plan) {
  const auto n = VertexId(parent.size());
  if (n != plan.n) {
    throw std::invalid_argument("rescale: tree size disagrees with the plan");
  }
  if (!(plan.edge_scale > 0.0)) {
    throw std::invalid_argument("rescale: edge_scale must be > 0");
  }
  if (plan.mass_scale < 0.0 || plan.node_mass_scale < 0.0) {
    throw std::invalid_argument("rescale: mass scales must be >= 0");
  }

  std::vector<std::int32_t> child_count(std::size_t(n), 0);
  VertexId root = kNoVertex;
  for (VertexId v = 0; v < n; ++v) {
    const VertexId p = parent[std::size_t(v)];
    if (p == kNoVertex) {
      root = v;
    } else if (p >= 0 && p < n) {
      ++child_count[std::size_t(p)];
    }
  }
  if (root == kNoVertex) throw std::invalid_argument("rescale: no root");

  std::vector<double> edge_len(std::size_t(n), plan.edge_scale);
  std::vector<double> vertex_mass(std::size_t(n), plan.mass_scale);
  std::vector<double> node_mass(std::size_t(n), 0.0);
  edge_len[std::size_t(root)] = 0.0;
  vertex_mass[std::size_t(root)] = 0.0;
  for (VertexId v = 0; v < n; ++v) {
    if (child_count[std::size_t(v)] > 1) {
      node_mass[std::size_t(v)] =
          plan.node_mass_scale * double(child_count[std::size_t(v)] - 1);
    }
  }
  return WTree::build(std::vector<VertexId>(parent.begin(), parent.end()),
                      std::move(edge_len), std::move(vertex_mass),
                      std::move(node_mass));
}

CalibrationResult calibrate_from_unit_heights(std::span<const double> heights,
                                              VertexId n) {
  if (n < 2) throw std::invalid_argument("calibrate: n must be >= 2");
  if (heights.size() < 2) {
    throw std::invalid_argument("calibrate: needs at least 2 pilot heights");
  }
  double sum = 0.0;
  for (const double h : heights) sum += h;
  const double mean = sum / double(heights.size());
  if (!(mean > 0.0)) {
    throw std::runtime_error("calibrate: pilot mean height is zero");
  }
  double ss = 0.0;
  for (const double h : heights) ss += (h - mean) * (h - mean);
  const double sd = std::sqrt(ss / double(heights.size() - 1));
  const double rel_stderr =
      sd / std::sqrt(double(heights.size())) / mean;

  const double target = std::sqrt(std::numbers::pi / 2.0);
  const double c = target / mean;
  return CalibrationResult{c, c / std::sqrt(double(n)), rel_stderr, n,
                           std::int64_t(heights.size())};
}

CalibrationResult calibrate_edge_scale(const OffspringLaw& law, VertexId n,
                                       std::int64_t pilot_reps, Rng& rng) {
  if (!law.finite_variance()) {
    throw std::invalid_argument(
        "calibrate: requires a finite-variance offspring law");
  }
  if (pilot_reps < 200) {
    throw std::invalid_argument("calibrate: pilot_reps must be >= 200");
  }
  if (n < 2) throw std::invalid_argument("calibrate: n must be >= 2");

  const double inv_sqrt_n = 1.0 / std::sqrt(double(n));
  std::vector<double> heights(static_cast<std::size_t>(pilot_reps));
  std::vector<std::int32_t> depth(static_cast<std::size_t>(n));
  for (std::int64_t rep = 0; rep < pilot_reps; ++rep) {
    const auto parent = sample_conditioned_tree(law, n, rng);
    depth[0] = 0;
    for (VertexId v = 1; v < n; ++v) {
      // preorder ids: parent[v] < v
      depth[std::size_t(v)] = depth[std::size_t(parent[std::size_t(v)])] + 1;
    }
    const auto v = VertexId(1 + rng.uniform_below(std::uint64_t(n) - 1));
    heights[std::size_t(rep)] = double(depth[std::size_t(v)]) * inv_sqrt_n;
  }
  auto result = calibrate_from_unit_heights(heights, n);
  if (result.rel_stderr > 0.05) {
    throw std::runtime_error(
        "calibrate: pilot mean is unstable (relative stderr above 5%)");
  }
  return result;
}

}  // namespace levytree
