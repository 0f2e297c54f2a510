#ifndef IVT_JUMP_HPP
#define IVT_JUMP_HPP

#include <Eigen/Core>

#include "ivt/control.hpp"
#include "ivt/system.hpp"
#include "ivt/trajectory.hpp"

namespace ivt {

/// Integrates the fast-time system
///   gamma'(s) = g(tau, gamma(s))(s) <c, alpha(s)>,  gamma(-1/2) = x_minus
/// with fixed-step RK4 on a uniform s-grid. Throws JumpEscapeError if the
/// transit leaves the domain box, EvalError on a non-finite right-hand side.
FastCurve solve_limit_system(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                             const ImpulseAtom& atom, int steps = 256);

/// gamma(1/2) with a Richardson check: the result at 2*steps must agree with
/// the result at steps within richardson_tol, else ConvergenceError. Returns
/// the finer value.
Eigen::VectorXd jump_endpoint(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                              const ImpulseAtom& atom, int steps = 256,
                              double richardson_tol = 1e-8);

}  // namespace ivt

#endif
