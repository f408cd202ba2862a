#pragma once
// Critical Galton-Watson generation: offspring laws, exact samplers for
// plane trees conditioned on total progeny (rejection on the offspring sum
// plus the cycle lemma on the Lukasiewicz path), continuum scaling plans and
// the pilot calibration of the edge scale.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "levytree/rng.hpp"
#include "levytree/tree.hpp"

namespace levytree {

class OffspringLaw {
 public:
  enum class Kind { poisson, geometric, stable_tail };

  /// Mean-1 Poisson.
  static OffspringLaw poisson();
  /// p_k = 2^{-(k+1)}, k >= 0 (critical geometric).
  static OffspringLaw geometric();
  /// Heavy tail p_k = c k^{-1-gamma} on 2 <= k <= n_max with c fixed by
  /// criticality (mean exactly 1 over the truncated support) and p_0 by
  /// normalization; p_1 = 0. gamma must lie in (1, 2).
  static OffspringLaw stable_tail(double gamma, std::int64_t n_max = 1000000);

  Kind kind() const { return kind_; }
  std::string name() const;
  double pmf(std::int64_t k) const;
  double mean() const;
  bool finite_variance() const { return kind_ != Kind::stable_tail; }
  double gamma() const;
  std::int64_t sample(Rng& rng) const;

 private:
  OffspringLaw() = default;

  Kind kind_ = Kind::poisson;
  double gamma_ = 0.0;
  std::int64_t n_max_ = 0;
  double p0_ = 0.0;
  double coeff_ = 0.0;
  std::vector<double> cumulative_;  // stable tail: P(X <= k), k from 2
};

/// Plane tree with n vertices drawn from the law conditioned on total
/// progeny n. Returns the parent array in preorder (root = 0). The offspring
/// sequence is redrawn until it sums to n-1 (with early abort) and the
/// unique cyclic rotation whose Lukasiewicz path stays non-negative until
/// the final step is decoded.
std::vector<VertexId> sample_conditioned_tree(const OffspringLaw& law,
                                              VertexId n, Rng& rng);

/// Exact total-progeny probability P(|T| = n) = (1/n) P(xi_1+...+xi_n = n-1)
/// by direct convolution; intended as a small-n oracle (n <= 8).
double total_progeny_check(const OffspringLaw& law, std::int64_t n);

/// Continuum scaling applied to a conditioned plane tree: every non-root
/// vertex gets edge length edge_scale and mass mass_scale; vertices with
/// c children get node mass node_mass_scale * max(0, c - 1).
struct ScalingPlan {
  VertexId n;
  double edge_scale;
  double mass_scale;
  double node_mass_scale;
  double gamma;  // index of the target mechanism (2 = Brownian)

  /// Plan targeting total mass 1: mass_scale = 1/(n-1).
  static ScalingPlan sigma_one(VertexId n, double edge_scale,
                               double node_mass_scale = 0.0,
                               double gamma = 2.0);
};

WTree rescale(std::span<const VertexId> parent, const ScalingPlan& plan);

/// Edge-scale calibration: edge_scale = c/sqrt(n) with c chosen so the pilot
/// mean height of a mass-uniform vertex equals sqrt(pi/2), the mean of the
/// standard Rayleigh law.
struct CalibrationResult {
  double c;
  double edge_scale;
  double rel_stderr;  // of the pilot mean
  VertexId n;
  std::int64_t pilot_reps;
};

/// Pure reduction from observed unit-scale heights (depth/sqrt(n)); a pilot
/// whose heights are constantly sqrt(pi/2) yields c = 1.
CalibrationResult calibrate_from_unit_heights(std::span<const double> heights,
                                              VertexId n);

/// Sampling front end: pilot_reps conditioned trees, one uniform non-root
/// vertex each. Requires a finite-variance law and pilot_reps >= 200; fails
/// if the pilot relative stderr exceeds 5%.
CalibrationResult calibrate_edge_scale(const OffspringLaw& law, VertexId n,
                                       std::int64_t pilot_reps, Rng& rng);

}  // namespace levytree
