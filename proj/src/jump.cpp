#include "ivt/jump.hpp"

#include <cmath>
#include <string>

#include "ivt/errors.hpp"

namespace ivt {

namespace {

Eigen::VectorXd fast_rhs(const SystemSpec& system, double tau, const ImpulseAtom& atom, double s,
                         const Eigen::VectorXd& gamma) {
  const Eigen::MatrixXd G = system.g(tau, gamma, s);
  const Eigen::VectorXd v = G * atom.shaped_magnitude(s);
  if (!v.allFinite())
    throw EvalError("non-finite fast right-hand side at s = " + std::to_string(s));
  return v;
}

}  // namespace

FastCurve solve_limit_system(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                             const ImpulseAtom& atom, int steps) {
  if (steps < 64) throw ContractError("fast solver needs at least 64 steps");
  if (atom.dim() != system.n) throw ContractError("atom dimension does not match system");

  FastCurve curve;
  curve.tau = tau;
  curve.s.resize(steps + 1);
  curve.states.resize(system.n, steps + 1);

  const double h = (kFastHi - kFastLo) / steps;
  Eigen::VectorXd y = x_minus;
  curve.s(0) = kFastLo;
  curve.states.col(0) = y;
  for (int i = 0; i < steps; ++i) {
    const double s = kFastLo + h * i;
    const Eigen::VectorXd k1 = fast_rhs(system, tau, atom, s, y);
    const Eigen::VectorXd k2 = fast_rhs(system, tau, atom, s + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = fast_rhs(system, tau, atom, s + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = fast_rhs(system, tau, atom, s + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double s_next = kFastLo + h * (i + 1);
    if (!system.domain.contains_state(y))
      throw JumpEscapeError("jump escapes domain at s = " + std::to_string(s_next), s_next, y);
    curve.s(i + 1) = s_next;
    curve.states.col(i + 1) = y;
  }
  curve.s(steps) = kFastHi;  // exact endpoint, no accumulated drift
  return curve;
}

Eigen::VectorXd jump_endpoint(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                              const ImpulseAtom& atom, int steps, double richardson_tol) {
  const Eigen::VectorXd coarse = solve_limit_system(system, tau, x_minus, atom, steps).exitpoint();
  const Eigen::VectorXd fine =
      solve_limit_system(system, tau, x_minus, atom, 2 * steps).exitpoint();
  const double delta = (fine - coarse).lpNorm<Eigen::Infinity>();
  if (delta >= richardson_tol)
    throw ConvergenceError("jump endpoint not converged: doubling steps moved the result by " +
                           std::to_string(delta));
  return fine;
}

}  // namespace ivt
