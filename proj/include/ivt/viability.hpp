#ifndef IVT_VIABILITY_HPP
#define IVT_VIABILITY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ivt/control.hpp"
#include "ivt/system.hpp"
#include "ivt/trajectory.hpp"

namespace ivt {

/// Analytic constraint set M = {x : eta_i(x) <= 0, 1 <= i <= m}.
struct ConstraintSet {
  int n = 0;
  std::vector<std::function<double(const Eigen::VectorXd&)>> etas;
  std::vector<std::function<Eigen::VectorXd(const Eigen::VectorXd&)>> grads;

  int count() const { return static_cast<int>(etas.size()); }
  double eta(int i, const Eigen::VectorXd& x) const { return etas[i](x); }
  Eigen::VectorXd grad(int i, const Eigen::VectorXd& x) const { return grads[i](x); }
  double max_eta(const Eigen::VectorXd& x) const;

  /// Builds gradients by central differences with step h when no analytic
  /// gradient is supplied for a constraint.
  static ConstraintSet build(int n, std::vector<std::function<double(const Eigen::VectorXd&)>> etas,
                             std::vector<std::function<Eigen::VectorXd(const Eigen::VectorXd&)>>
                                 analytic_grads = {},
                             double h = 1e-6);
};

struct ActiveSet {
  std::vector<int> indices;
  /// Smallest singular value of the active-gradient matrix (1 when empty).
  double smallest_singular_value = 1.0;
  bool gradients_independent = true;
};

/// L_x = {i : |eta_i(x)| <= eps}, with the linear-independence hypothesis on
/// the active gradients checked via SVD.
ActiveSet active_set(const ConstraintSet& M, const Eigen::VectorXd& x, double eps = 1e-7);

struct ConeMembership {
  bool member = false;
  /// No active constraint at x: the test is vacuous.
  bool vacuous = false;
  double worst_inner = 0.0;
};

/// y belongs to the contingent cone at x iff (grad eta_i(x), y) <= slack for
/// every active i.
ConeMembership contingent_membership(const ConstraintSet& M, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, double eps = 1e-7,
                                     double slack = 1e-9);

/// Quasi-random seeds projected onto the boundary of M by damped Newton on
/// one constraint at a time; every returned point has max_i eta_i within
/// [-eps, eps].
std::vector<Eigen::VectorXd> boundary_samples(const ConstraintSet& M, const Eigen::VectorXd& lo,
                                              const Eigen::VectorXd& hi, int count,
                                              double eps = 1e-7);

enum class CertificateMode { nagumo, impulse, stability };

struct BoundaryCheck {
  Eigen::VectorXd x;
  std::vector<int> active;
  double worst_inner = 0.0;
};

struct Counterexample {
  Eigen::VectorXd x;
  int constraint = 0;
  std::optional<double> t;
  std::optional<double> s;
  std::optional<int> atom;
  double inner = 0.0;
};

struct ViabilityCertificate {
  CertificateMode mode = CertificateMode::nagumo;
  bool pass = false;
  double slack = 1e-9;
  std::vector<BoundaryCheck> samples;
  std::optional<Counterexample> counterexample;
  std::string note;
  /// Nonempty when the independence hypothesis failed somewhere.
  std::vector<std::string> hypothesis_issues;
};

struct CertificateOptions {
  int boundary_count = 0;  // 0 = default by dimension (256 for n<=2, 1024 for n=3)
  int t_samples = 33;
  int s_samples = 65;
  double active_eps = 1e-7;
  double slack = 1e-9;
};

/// Tangency of f alone on the boundary over the window: the flow-only
/// sufficient condition.
ViabilityCertificate nagumo_check(const SystemSpec& system, const ConstraintSet& M, double t0,
                                  double T, const CertificateOptions& opts = {});

/// Sufficient conditions for the impulse system: the density direction
/// f + g w on a (t, boundary) grid and every shaped atom direction
/// g(tau_k, x)(s) <c_k, alpha_k(s)> on an (atom, s, boundary) grid.
ViabilityCertificate impulse_viability_check(const SystemSpec& system,
                                             const ImpulseControl& control,
                                             const ConstraintSet& M, double t0, double T,
                                             const CertificateOptions& opts = {});

struct StabilityRadius {
  int l = 0;
  bool pass = false;
  double worst_inner = 0.0;
  std::optional<Counterexample> counterexample;
};

struct StabilityReport {
  bool pass = false;
  Eigen::VectorXd x_star;
  std::vector<StabilityRadius> radii;
  double slack = 1e-9;
};

/// Certificate of uniform stability of the equilibrium x_star (f(x_star) = 0,
/// g(x_star) = 0 verified to 1e-9): sphere conditions per radius 1/l.
StabilityReport stability_check(const SystemSpec& system, const Eigen::VectorXd& x_star,
                                const ImpulseControl& control, const std::vector<int>& l_list,
                                double t0, double T, const CertificateOptions& opts = {});

struct AuditExit {
  bool fast = false;
  double t = 0.0;       // slow exit time, or atom time for fast exits
  double s = 0.0;       // fast exit location
  int constraint = 0;
  Eigen::VectorXd x;
};

struct AuditResult {
  bool viable = true;
  std::optional<AuditExit> exit;
};

/// Checks every slow sample and every fast-curve sample of the trajectory
/// against eta_i <= tol; reports the first violation, distinguishing
/// mid-jump exits.
AuditResult trajectory_viability_audit(const DynamicTrajectory& trajectory,
                                       const ConstraintSet& M, double tol);

}  // namespace ivt

#endif
