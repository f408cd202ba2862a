#pragma once
// Branching mechanisms psi(lambda) = alpha*lambda + beta*lambda^2
//                                    + integral (e^{-lambda r} - 1 + lambda r) pi(dr)
// for critical/sub-critical continuous-state branching, plus the analytic
// quantities the simulation pipeline needs: the scale solver v(a) with
// integral_{v(a)}^inf dlambda/psi(lambda) = a, the inverse of psi, the spine
// intensity g(lambda) = psi'(psi^{-1}(lambda)), the biased-root Laplace
// transform 1/(rho + g(lambda)), closed-form moments of the normalized
// branch-length law, and the small-mass tail constant of the Brownian case.

#include <span>
#include <string>
#include <vector>

namespace levytree {

enum class LevyKind { none, stable, finite_atoms };

/// Jump measure atom: mass at jump size r.
struct LevyAtom {
  double r;
  double mass;
};

struct StableSpec {
  double c0;
  double gamma;  // strictly inside (1, 2); gamma = 2 is encoded via beta
};

class BranchingMechanism {
 public:
  /// psi = alpha*lambda + beta*lambda^2.
  static BranchingMechanism quadratic(double beta, double alpha = 0.0);
  /// psi = lambda^2 / 2.
  static BranchingMechanism brownian();
  /// psi = alpha*lambda + beta*lambda^2 + c0*lambda^gamma.
  static BranchingMechanism stable(double c0, double gamma, double alpha = 0.0,
                                   double beta = 0.0);
  /// psi = alpha*lambda + beta*lambda^2 + sum_k m_k (e^{-lambda r_k} - 1 + lambda r_k).
  static BranchingMechanism with_atoms(std::vector<LevyAtom> atoms,
                                       double alpha = 0.0, double beta = 0.0);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  LevyKind levy_kind() const { return kind_; }
  const StableSpec& stable_spec() const;
  std::span<const LevyAtom> atoms() const { return atoms_; }

  /// True exactly for psi(lambda) = lambda^2/2.
  bool is_brownian() const;

 private:
  BranchingMechanism() = default;

  double alpha_ = 0.0;
  double beta_ = 0.0;
  LevyKind kind_ = LevyKind::none;
  StableSpec stable_{0.0, 0.0};
  std::vector<LevyAtom> atoms_;
};

/// psi(lambda); lambda must be >= 0.
double eval_psi(const BranchingMechanism& mech, double lambda);

struct PsiDerivatives {
  double first;
  double second;
};

/// (psi', psi'') at lambda >= 0. The stable second derivative is singular at
/// lambda = 0 and raises a domain error there.
PsiDerivatives psi_derivatives(const BranchingMechanism& mech, double lambda);

/// The shifted mechanism psi_q(lambda) = psi(lambda + q) - psi(q), evaluable
/// like the base mechanism. psi_q(0) = 0 and psi_q'(0) = psi'(q) by
/// construction.
class ShiftedMechanism {
 public:
  ShiftedMechanism(BranchingMechanism base, double q);

  double eval(double lambda) const;
  PsiDerivatives derivatives(double lambda) const;
  double shift() const { return q_; }
  const BranchingMechanism& base() const { return base_; }

 private:
  BranchingMechanism base_;
  double q_;
};

ShiftedMechanism shift_mechanism(const BranchingMechanism& mech, double q);

/// Whether integral^inf dlambda/psi(lambda) converges (so the tree has finite
/// height and the scale solver is well defined). Decided analytically:
/// quadratic and stable parts always dominate; a pure finite-atom jump part
/// grows only linearly, so Grey holds there iff beta > 0.
bool check_grey(const BranchingMechanism& mech);

/// Root-finding and quadrature wrapper around one mechanism.
class MechanismAnalytics {
 public:
  explicit MechanismAnalytics(BranchingMechanism mech, double tol_root = 1e-10,
                              double tol_quad = 1e-12);

  /// v(a) with integral_{v(a)}^inf dlambda/psi = a; requires a > 0 and Grey.
  double solve_v(double a) const;
  /// Unique lambda >= 0 with psi(lambda) = y; requires y >= 0.
  double psi_inverse(double y) const;
  /// g(lambda) = psi'(psi^{-1}(lambda)); requires lambda > 0.
  double g_eval(double lambda) const;
  /// integral_0^inf e^{-rho a - a g(lambda)} da = 1/(rho + g(lambda)).
  double bismut_laplace(double lambda, double rho) const;
  /// integral_v^inf dlambda/psi(lambda); requires v > 0 and Grey.
  double grey_tail_integral(double v) const;

  const BranchingMechanism& mechanism() const { return mech_; }
  double tol_root() const { return tol_root_; }
  double tol_quad() const { return tol_quad_; }

 private:
  BranchingMechanism mech_;
  double tol_root_;
  double tol_quad_;
};

/// n-th moment of the normalized branch-length law of the stable-index-gamma
/// mechanism c0*lambda^gamma:
///   E[Z^n] = Gamma(a) Gamma(n+1) / (c0^{n/gamma} gamma^n Gamma(a(n+1))),
///   a = (gamma-1)/gamma.
/// gamma in (1, 2] here; at gamma = 2, c0 = 1/2 this reduces to the Rayleigh
/// moments 2^{n/2} Gamma(1 + n/2).
double z_moment(double gamma, double c0, int n);

/// Tail mass of the canonical measure of tree sizes in the Brownian case:
/// N[sigma > eps] = sqrt(2/(pi eps)). Requires psi(lambda) = lambda^2/2.
double brownian_canonical_tail(const BranchingMechanism& mech, double epsilon);

/// Mechanism spec as a JSON config dictionary
/// {alpha, beta, levy: "none" | {"stable": {c0, gamma}} | {"atoms": [[r, m], ...]}}.
/// Round-trips exactly (shortest round-trip decimals).
std::string mechanism_to_config_json(const BranchingMechanism& mech);
BranchingMechanism mechanism_from_config_json(const std::string& text);

}  // namespace levytree
