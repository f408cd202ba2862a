#pragma once
// Statistical verification layer: labeled sample sets, one- and two-sample
// Kolmogorov-Smirnov tests with the asymptotic p-value series, plug-in
// moment estimates with jackknife standard errors, and the exponential
// point-measure identity checker.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace levytree {

struct SeedInfo {
  std::uint64_t master_seed = 0;
  std::int64_t replica_begin = 0;
  std::int64_t replica_end = 0;  // exclusive
};

struct SampleSet {
  std::vector<double> values;  // finite
  std::string label;           // nonempty
  SeedInfo seed_info;
};

struct KsReport {
  std::string test;
  double d = 0.0;
  std::int64_t n = 0;
  std::int64_t m = 0;  // 0 for one-sample tests
  double p_approx = 1.0;
  double alpha = 0.0;
  bool pass = false;
};

/// Tail Q(t) of the Kolmogorov distribution, series truncated at 100 terms;
/// returns 1 below t = 0.05 where the truncation is unreliable.
double kolmogorov_tail(double t);

/// Fraction of (sorted ascending) values <= x.
double ecdf_at(std::span<const double> sorted_values, double x);

/// Sup deviation of the sample ECDF from cdf, by the sorted-sample formula;
/// p from the asymptotic series at t = sqrt(n) D. Requires >= 50 samples
/// and cdf values in [0, 1].
KsReport ks_one_sample(const SampleSet& samples,
                       const std::function<double(double)>& cdf,
                       double alpha = 0.01);

/// Classical two-sample sup deviation; p at t = sqrt(nm/(n+m)) D. Both
/// sets need >= 50 samples.
KsReport ks_two_sample(const SampleSet& a, const SampleSet& b,
                       double alpha = 0.01);

struct MomentEstimate {
  std::int64_t order = 0;
  double value = 0.0;
  double stderr_jack = 0.0;  // leave-one-out jackknife
};

/// Plug-in estimates of E[X^k] for each requested order. Requires >= 2
/// samples; orders must be >= 1.
std::vector<MomentEstimate> moments(const SampleSet& samples,
                                    std::span<const std::int64_t> orders);

struct PointMassAtom {
  double r = 0.0;  // level
  double x = 0.0;  // weight
};

struct Lemma41Result {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the survival identity for a finite point measure cut at
/// level r: lhs = 1 - exp(-sum_{r_j >= r} x_j) and rhs telescopes the same
/// quantity atom by atom in decreasing level order. Levels must be
/// distinct; the caller asserts |lhs - rhs| within tolerance.
Lemma41Result lemma41_check(std::span<const PointMassAtom> atoms, double r);

/// {test, D, n, m, p_approx, pass, alpha} as a JSON object string.
std::string ks_report_to_json(const KsReport& report);

}  // namespace levytree
