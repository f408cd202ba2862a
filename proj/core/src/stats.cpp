#include "levytree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace levytree {

namespace {

void check_sample_set(const SampleSet& s, std::size_t min_size) {
  if (s.label.empty()) {
    throw std::invalid_argument("sample set: label must be nonempty");
  }
  if (s.values.size() < min_size) {
    throw std::invalid_argument("sample set '" + s.label + "': needs >= " +
                                std::to_string(min_size) + " samples, has " +
                                std::to_string(s.values.size()));
  }
  for (const double v : s.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("sample set '" + s.label +
                                  "': non-finite value");
    }
  }
}

std::vector<double> sorted_copy(const std::vector<double>& v) {
  std::vector<double> out(v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double kolmogorov_tail(double t) {
  if (!(t >= 0.0)) throw std::domain_error("kolmogorov_tail: t must be >= 0");
  if (t < 0.05) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    sum += sign * std::exp(-2.0 * double(k) * double(k) * t * t);
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ecdf_at(std::span<const double> sorted_values, double x) {
  if (sorted_values.empty()) {
    throw std::invalid_argument("ecdf_at: empty sample");
  }
  const auto it =
      std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return double(it - sorted_values.begin()) / double(sorted_values.size());
}

KsReport ks_one_sample(const SampleSet& samples,
                       const std::function<double(double)>& cdf,
                       double alpha) {
  check_sample_set(samples, 50);
  const auto sorted = sorted_copy(samples.values);
  const auto n = double(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument(
          "ks_one_sample: cdf left [0, 1] at x = " + std::to_string(sorted[i]));
    }
    d = std::max(d, (double(i) + 1.0) / n - f);
    d = std::max(d, f - double(i) / n);
  }
  KsReport r;
  r.test = samples.label;
  r.d = d;
  r.n = std::int64_t(sorted.size());
  r.m = 0;
  r.p_approx = kolmogorov_tail(std::sqrt(n) * d);
  r.alpha = alpha;
  r.pass = r.p_approx > alpha;
  return r;
}

KsReport ks_two_sample(const SampleSet& a, const SampleSet& b, double alpha) {
  check_sample_set(a, 50);
  check_sample_set(b, 50);
  const auto xa = sorted_copy(a.values);
  const auto xb = sorted_copy(b.values);
  const double n = double(xa.size());
  const double m = double(xb.size());

  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xa.size() || j < xb.size()) {
    const double x = [&] {
      if (i == xa.size()) return xb[j];
      if (j == xb.size()) return xa[i];
      return std::min(xa[i], xb[j]);
    }();
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(double(i) / n - double(j) / m));
  }

  KsReport r;
  r.test = a.label + " vs " + b.label;
  r.d = d;
  r.n = std::int64_t(xa.size());
  r.m = std::int64_t(xb.size());
  r.p_approx = kolmogorov_tail(std::sqrt(n * m / (n + m)) * d);
  r.alpha = alpha;
  r.pass = r.p_approx > alpha;
  return r;
}

std::vector<MomentEstimate> moments(const SampleSet& samples,
                                    std::span<const std::int64_t> orders) {
  check_sample_set(samples, 2);
  const auto& x = samples.values;
  const auto n = double(x.size());

  std::vector<MomentEstimate> out;
  out.reserve(orders.size());
  std::vector<double> powers(x.size());
  std::vector<double> loo(x.size());
  for (const std::int64_t k : orders) {
    if (k < 1) throw std::invalid_argument("moments: orders must be >= 1");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      powers[i] = std::pow(x[i], double(k));
      sum += powers[i];
    }
    const double est = sum / n;
    // Leave-one-out replicates of the plug-in estimator.
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      loo[i] = (sum - powers[i]) / (n - 1.0);
      loo_mean += loo[i];
    }
    loo_mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ss += (loo[i] - loo_mean) * (loo[i] - loo_mean);
    }
    out.push_back(
        MomentEstimate{k, est, std::sqrt(ss * (n - 1.0) / n)});
  }
  return out;
}

Lemma41Result lemma41_check(std::span<const PointMassAtom> atoms, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("lemma41_check: r must be >= 0");
  std::vector<PointMassAtom> kept;
  kept.reserve(atoms.size());
  for (const PointMassAtom& a : atoms) {
    if (!(a.r >= 0.0) || !(a.x >= 0.0)) {
      throw std::invalid_argument("lemma41_check: atoms must be >= 0");
    }
    if (a.r >= r) kept.push_back(a);
  }
  std::sort(kept.begin(), kept.end(),
            [](const PointMassAtom& a, const PointMassAtom& b) {
              return a.r > b.r;
            });
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (kept[i].r == kept[i - 1].r) {
      throw std::invalid_argument("lemma41_check: duplicate level " +
                                  std::to_string(kept[i].r));
    }
  }

  double above = 0.0;  // sum of weights at strictly higher levels
  double rhs = 0.0;
  double total = 0.0;
  for (const PointMassAtom& a : kept) {
    rhs += -std::expm1(-a.x) * std::exp(-above);
    above += a.x;
    total += a.x;
  }
  return Lemma41Result{-std::expm1(-total), rhs};
}

std::string ks_report_to_json(const KsReport& report) {
  return nlohmann::json{{"test", report.test},
                        {"D", report.d},
                        {"n", report.n},
                        {"m", report.m},
                        {"p_approx", report.p_approx},
                        {"pass", report.pass},
                        {"alpha", report.alpha}}
      .dump();
}

}  // namespace levytree
