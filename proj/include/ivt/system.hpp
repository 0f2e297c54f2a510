#ifndef IVT_SYSTEM_HPP
#define IVT_SYSTEM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ivt {

/// Axis-aligned box D = (t_lo, t_hi) x prod_i (x_lo_i, x_hi_i).
struct DomainBox {
  double t_lo = -1e300;
  double t_hi = 1e300;
  Eigen::VectorXd x_lo;
  Eigen::VectorXd x_hi;

  bool contains(double t, const Eigen::VectorXd& x) const;
  bool contains_state(const Eigen::VectorXd& x) const;
  /// Smallest distance from x to a face of the state box (negative outside).
  double state_margin(const Eigen::VectorXd& x) const;
};

struct LipschitzHints {
  std::optional<double> f;
  std::optional<double> g;
};

/// Right-hand side data of xdot = f(t,x) + g(t,x) v. The matrix field g may
/// carry a fast-time argument s, which is meaningful only inside jumps; slow
/// evaluation passes nullopt.
struct SystemSpec {
  int n = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> f;
  std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&, std::optional<double>)> g;
  DomainBox domain;
  LipschitzHints lipschitz;
  bool g_fast_time = false;

  Eigen::MatrixXd g_slow(double t, const Eigen::VectorXd& x) const { return g(t, x, std::nullopt); }
  Eigen::MatrixXd g_fast(double t, const Eigen::VectorXd& x, double s) const { return g(t, x, s); }
};

/// Convenience factory for a g that never looks at fast time.
std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&, std::optional<double>)>
slow_matrix_field(std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> g);

struct SystemValidation {
  bool finite_ok = true;
  bool lipschitz_ok = true;
  double max_f_slope = 0.0;
  double max_g_slope = 0.0;
  std::vector<std::string> issues;
  bool ok() const { return finite_ok && lipschitz_ok; }
};

/// Samples the domain box: f and g must be finite everywhere sampled, and
/// empirical difference quotients must not exceed 10x the Lipschitz hints
/// when hints are present.
SystemValidation validate_system(const SystemSpec& system, int samples = 200);

}  // namespace ivt

#endif
