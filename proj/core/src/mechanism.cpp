#include "levytree/mechanism.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace levytree {

namespace {

void require_finite(double x, const char* field) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string("mechanism: ") + field +
                                " must be finite");
  }
}

// e^{-x} - 1 + x, accurate for all x >= 0. Direct expm1 loses the leading
// digits below x ~ 1e-4, where the alternating series is exact to 1ulp.
double compensated_exp_term(double x) {
  if (x < 1e-4) {
    return x * x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 - x / 120.0)));
  }
  return std::expm1(-x) + x;
}

}  // namespace

BranchingMechanism BranchingMechanism::quadratic(double beta, double alpha) {
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
  if (alpha < 0.0) throw std::invalid_argument("mechanism: alpha must be >= 0");
  if (beta <= 0.0) {
    throw std::invalid_argument(
        "mechanism: beta must be > 0 when there is no jump part");
  }
  BranchingMechanism m;
  m.alpha_ = alpha;
  m.beta_ = beta;
  m.kind_ = LevyKind::none;
  return m;
}

BranchingMechanism BranchingMechanism::brownian() { return quadratic(0.5); }

BranchingMechanism BranchingMechanism::stable(double c0, double gamma,
                                              double alpha, double beta) {
  require_finite(c0, "c0");
  require_finite(gamma, "gamma");
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
  if (c0 <= 0.0) throw std::invalid_argument("mechanism: c0 must be > 0");
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw std::invalid_argument(
        "mechanism: stable gamma must lie strictly inside (1, 2); encode "
        "gamma = 2 through beta");
  }
  if (alpha < 0.0) throw std::invalid_argument("mechanism: alpha must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("mechanism: beta must be >= 0");
  BranchingMechanism m;
  m.alpha_ = alpha;
  m.beta_ = beta;
  m.kind_ = LevyKind::stable;
  m.stable_ = StableSpec{c0, gamma};
  return m;
}

BranchingMechanism BranchingMechanism::with_atoms(std::vector<LevyAtom> atoms,
                                                  double alpha, double beta) {
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
  if (alpha < 0.0) throw std::invalid_argument("mechanism: alpha must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("mechanism: beta must be >= 0");
  if (atoms.empty()) {
    throw std::invalid_argument(
        "mechanism: atom list must be non-empty (use quadratic instead)");
  }
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    require_finite(atoms[k].r, "atom r");
    require_finite(atoms[k].mass, "atom mass");
    if (atoms[k].r <= 0.0 || atoms[k].mass <= 0.0) {
      throw std::invalid_argument("mechanism: atom " + std::to_string(k) +
                                  " must have r > 0 and mass > 0");
    }
  }
  BranchingMechanism m;
  m.alpha_ = alpha;
  m.beta_ = beta;
  m.kind_ = LevyKind::finite_atoms;
  m.atoms_ = std::move(atoms);
  return m;
}

const StableSpec& BranchingMechanism::stable_spec() const {
  if (kind_ != LevyKind::stable) {
    throw std::domain_error("mechanism: no stable spec on this mechanism");
  }
  return stable_;
}

bool BranchingMechanism::is_brownian() const {
  return kind_ == LevyKind::none && alpha_ == 0.0 && beta_ == 0.5;
}

double eval_psi(const BranchingMechanism& mech, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::domain_error("eval_psi: lambda must be >= 0");
  }
  double out = mech.alpha() * lambda + mech.beta() * lambda * lambda;
  switch (mech.levy_kind()) {
    case LevyKind::none:
      break;
    case LevyKind::stable: {
      const auto& s = mech.stable_spec();
      out += s.c0 * std::pow(lambda, s.gamma);
      break;
    }
    case LevyKind::finite_atoms:
      for (const auto& a : mech.atoms()) {
        out += a.mass * compensated_exp_term(lambda * a.r);
      }
      break;
  }
  return out;
}

PsiDerivatives psi_derivatives(const BranchingMechanism& mech, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::domain_error("psi_derivatives: lambda must be >= 0");
  }
  double first = mech.alpha() + 2.0 * mech.beta() * lambda;
  double second = 2.0 * mech.beta();
  switch (mech.levy_kind()) {
    case LevyKind::none:
      break;
    case LevyKind::stable: {
      const auto& s = mech.stable_spec();
      first += s.gamma * s.c0 * std::pow(lambda, s.gamma - 1.0);
      if (lambda == 0.0) {
        throw std::domain_error(
            "psi_derivatives: second derivative of a stable mechanism is "
            "singular at lambda = 0");
      }
      second += s.gamma * (s.gamma - 1.0) * s.c0 *
                std::pow(lambda, s.gamma - 2.0);
      break;
    }
    case LevyKind::finite_atoms:
      for (const auto& a : mech.atoms()) {
        first += a.mass * a.r * (-std::expm1(-lambda * a.r));
        second += a.mass * a.r * a.r * std::exp(-lambda * a.r);
      }
      break;
  }
  return {first, second};
}

ShiftedMechanism::ShiftedMechanism(BranchingMechanism base, double q)
    : base_(std::move(base)), q_(q) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("shift_mechanism: q must be finite and >= 0");
  }
}

double ShiftedMechanism::eval(double lambda) const {
  if (!(lambda >= 0.0)) {
    throw std::domain_error("shifted eval: lambda must be >= 0");
  }
  return eval_psi(base_, lambda + q_) - eval_psi(base_, q_);
}

PsiDerivatives ShiftedMechanism::derivatives(double lambda) const {
  return psi_derivatives(base_, lambda + q_);
}

ShiftedMechanism shift_mechanism(const BranchingMechanism& mech, double q) {
  return ShiftedMechanism(mech, q);
}

bool check_grey(const BranchingMechanism& mech) {
  switch (mech.levy_kind()) {
    case LevyKind::none:
    case LevyKind::stable:
      return true;  // quadratic resp. lambda^gamma growth, gamma > 1
    case LevyKind::finite_atoms:
      return mech.beta() > 0.0;  // the jump part alone grows only linearly
  }
  return false;
}

namespace {

// Adaptive Simpson with the classic Richardson acceptance test.
template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Monotone root refinement on a bracketing interval: bisection with secant
// acceleration. evaluate(x) must be increasing; stops when
// |evaluate(x) - target| <= f_tol.
template <class F>
double refine_increasing_root(const F& evaluate, double target, double lo,
                              double hi, double f_lo, double f_hi,
                              double f_tol) {
  double x = lo;
  double fx = f_lo;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fx - target) <= f_tol) return x;
    double cand = 0.5 * (lo + hi);
    if (f_hi > f_lo) {
      const double secant = lo + (target - f_lo) * (hi - lo) / (f_hi - f_lo);
      if (secant > lo && secant < hi) cand = secant;
    }
    x = cand;
    fx = evaluate(x);
    if (fx < target) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * (1.0 + hi)) {
      return x;
    }
  }
  return x;
}

}  // namespace

MechanismAnalytics::MechanismAnalytics(BranchingMechanism mech,
                                       double tol_root, double tol_quad)
    : mech_(std::move(mech)), tol_root_(tol_root), tol_quad_(tol_quad) {
  if (!(tol_root > 0.0 && tol_root <= 1e-4)) {
    throw std::invalid_argument("analytics: tol_root must lie in (0, 1e-4]");
  }
  if (!(tol_quad > 0.0 && tol_quad <= 1e-4)) {
    throw std::invalid_argument("analytics: tol_quad must lie in (0, 1e-4]");
  }
}

double MechanismAnalytics::grey_tail_integral(double v) const {
  if (!(v > 0.0)) {
    throw std::domain_error("grey_tail_integral: v must be > 0");
  }
  if (!check_grey(mech_)) {
    throw std::domain_error(
        "grey_tail_integral: mechanism fails the finite-height condition");
  }
  const double alpha = mech_.alpha();
  const double beta = mech_.beta();
  if (mech_.levy_kind() == LevyKind::none) {
    if (alpha == 0.0) return 1.0 / (beta * v);
    // integral dl/(l(alpha + beta l)) = (1/alpha) ln(1 + alpha/(beta l))
    return std::log1p(alpha / (beta * v)) / alpha;
  }
  if (mech_.levy_kind() == LevyKind::stable && alpha == 0.0 && beta == 0.0) {
    const auto& s = mech_.stable_spec();
    return std::pow(v, 1.0 - s.gamma) / (s.c0 * (s.gamma - 1.0));
  }
  if (beta == 0.0) {
    throw std::domain_error(
        "grey_tail_integral: unsupported mechanism combination (stable plus "
        "linear part without a quadratic term)");
  }
  // Substitute u = 1/lambda: the integrand 1/(u^2 psi(1/u)) is bounded and
  // smooth on [0, 1/v] whenever beta > 0, with value 1/beta at u = 0.
  const auto q_of_u = [this, alpha, beta](double u) {
    double q = alpha * u + beta;
    if (mech_.levy_kind() == LevyKind::stable) {
      const auto& s = mech_.stable_spec();
      q += s.c0 * std::pow(u, 2.0 - s.gamma);
    } else {
      for (const auto& a : mech_.atoms()) {
        const double x = a.r / u;  // +inf at u = 0 is fine below
        if (x < 1e-4) {
          q += a.mass * u * u * compensated_exp_term(x);
        } else {
          q += a.mass * (u * u * std::expm1(-x) + a.r * u);
        }
      }
    }
    return q;
  };
  const auto integrand = [&q_of_u](double u) { return 1.0 / q_of_u(u); };
  return adaptive_simpson(integrand, 0.0, 1.0 / v, tol_quad_);
}

double MechanismAnalytics::solve_v(double a) const {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("solve_v: a must be finite and > 0");
  }
  if (!check_grey(mech_)) {
    throw std::domain_error(
        "solve_v: mechanism fails the finite-height condition");
  }
  const double alpha = mech_.alpha();
  const double beta = mech_.beta();
  if (mech_.levy_kind() == LevyKind::none) {
    if (alpha == 0.0) return 1.0 / (beta * a);
    return alpha / (beta * std::expm1(alpha * a));
  }
  if (mech_.levy_kind() == LevyKind::stable && alpha == 0.0 && beta == 0.0) {
    const auto& s = mech_.stable_spec();
    return std::pow(s.c0 * (s.gamma - 1.0) * a, -1.0 / (s.gamma - 1.0));
  }
  // The tail integral decreases in v; solve tail(v) = a on a grown bracket.
  const auto tail = [this](double v) { return grey_tail_integral(v); };
  double lo = tol_root_;
  double hi = 1.0;
  while (tail(hi) > a) {
    lo = hi;
    hi *= 8.0;
    if (hi > 1e300) throw std::runtime_error("solve_v: bracket overflow");
  }
  while (tail(lo) < a) {
    hi = lo;
    lo /= 8.0;
    if (lo < 1e-300) throw std::runtime_error("solve_v: bracket underflow");
  }
  // tail is decreasing; flip the sign to reuse the increasing refiner.
  const auto neg_tail = [&tail](double v) { return -tail(v); };
  return refine_increasing_root(neg_tail, -a, lo, hi, -tail(lo), -tail(hi),
                                tol_root_ * a);
}

double MechanismAnalytics::psi_inverse(double y) const {
  if (!(y >= 0.0) || !std::isfinite(y)) {
    throw std::domain_error("psi_inverse: y must be finite and >= 0");
  }
  if (y == 0.0) return 0.0;
  const double alpha = mech_.alpha();
  const double beta = mech_.beta();
  if (mech_.levy_kind() == LevyKind::none) {
    if (alpha == 0.0) return std::sqrt(y / beta);
    return (std::sqrt(alpha * alpha + 4.0 * beta * y) - alpha) / (2.0 * beta);
  }
  if (mech_.levy_kind() == LevyKind::stable && alpha == 0.0 && beta == 0.0) {
    const auto& s = mech_.stable_spec();
    return std::pow(y / s.c0, 1.0 / s.gamma);
  }
  const auto psi = [this](double l) { return eval_psi(mech_, l); };
  double hi = 1.0;
  while (psi(hi) < y) {
    hi *= 8.0;
    if (hi > 1e300) throw std::runtime_error("psi_inverse: bracket overflow");
  }
  return refine_increasing_root(psi, y, 0.0, hi, 0.0, psi(hi),
                                tol_root_ * std::max(1.0, y));
}

double MechanismAnalytics::g_eval(double lambda) const {
  if (!(lambda > 0.0)) {
    throw std::domain_error("g_eval: lambda must be > 0");
  }
  return psi_derivatives(mech_, psi_inverse(lambda)).first;
}

double MechanismAnalytics::bismut_laplace(double lambda, double rho) const {
  if (!(rho >= 0.0)) {
    throw std::domain_error("bismut_laplace: rho must be >= 0");
  }
  return 1.0 / (rho + g_eval(lambda));
}

double z_moment(double gamma, double c0, int n) {
  if (!(gamma > 1.0 && gamma <= 2.0)) {
    throw std::domain_error("z_moment: gamma must lie in (1, 2]");
  }
  if (!(c0 > 0.0)) throw std::domain_error("z_moment: c0 must be > 0");
  if (n < 1) throw std::domain_error("z_moment: n must be >= 1");
  const double a = (gamma - 1.0) / gamma;
  return std::exp(std::lgamma(a) + std::lgamma(double(n) + 1.0) -
                  std::lgamma(a * (double(n) + 1.0)) -
                  (double(n) / gamma) * std::log(c0) -
                  double(n) * std::log(gamma));
}

double brownian_canonical_tail(const BranchingMechanism& mech,
                               double epsilon) {
  if (!mech.is_brownian()) {
    throw std::domain_error(
        "brownian_canonical_tail: requires psi(lambda) = lambda^2/2");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("brownian_canonical_tail: epsilon must be > 0");
  }
  return std::sqrt(2.0 / (std::numbers::pi * epsilon));
}

std::string mechanism_to_config_json(const BranchingMechanism& mech) {
  nlohmann::json j;
  j["alpha"] = mech.alpha();
  j["beta"] = mech.beta();
  switch (mech.levy_kind()) {
    case LevyKind::none:
      j["levy"] = "none";
      break;
    case LevyKind::stable: {
      const auto& s = mech.stable_spec();
      j["levy"] = {{"stable", {{"c0", s.c0}, {"gamma", s.gamma}}}};
      break;
    }
    case LevyKind::finite_atoms: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& a : mech.atoms()) {
        arr.push_back({a.r, a.mass});
      }
      j["levy"] = {{"atoms", arr}};
      break;
    }
  }
  return j.dump();
}

BranchingMechanism mechanism_from_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("mechanism config: bad JSON: ") +
                                e.what());
  }
  if (!j.is_object() || !j.contains("alpha") || !j.contains("beta") ||
      !j.contains("levy")) {
    throw std::invalid_argument(
        "mechanism config: requires alpha, beta and levy fields");
  }
  const double alpha = j.at("alpha").get<double>();
  const double beta = j.at("beta").get<double>();
  const auto& levy = j.at("levy");
  if (levy.is_string() && levy.get<std::string>() == "none") {
    return BranchingMechanism::quadratic(beta, alpha);
  }
  if (levy.is_object() && levy.contains("stable")) {
    const auto& s = levy.at("stable");
    return BranchingMechanism::stable(s.at("c0").get<double>(),
                                      s.at("gamma").get<double>(), alpha,
                                      beta);
  }
  if (levy.is_object() && levy.contains("atoms")) {
    std::vector<LevyAtom> atoms;
    for (const auto& row : levy.at("atoms")) {
      if (!row.is_array() || row.size() != 2) {
        throw std::invalid_argument(
            "mechanism config: each atom must be a [r, mass] pair");
      }
      atoms.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    return BranchingMechanism::with_atoms(std::move(atoms), alpha, beta);
  }
  throw std::invalid_argument(
      "mechanism config: levy must be \"none\", {\"stable\": ...} or "
      "{\"atoms\": ...}");
}

}  // namespace levytree
