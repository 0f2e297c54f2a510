#ifndef IVT_SOLVE_HPP
#define IVT_SOLVE_HPP

#include <vector>

#include <Eigen/Core>

#include "ivt/control.hpp"
#include "ivt/system.hpp"
#include "ivt/trajectory.hpp"

namespace ivt {

struct SolveOptions {
  /// Absolute and relative local error tolerance of the slow integrator.
  double tol = 1e-8;
  /// Fast-segment RK4 resolution (doubled for the Richardson check).
  int fast_steps = 256;
  double richardson_tol = 1e-8;
  /// 0 = automatic.
  double initial_step = 0.0;
  double safety = 0.9;
  /// 0 = automatic (horizon/128). The cap keeps the recorded grid dense
  /// enough for Hermite interpolation and the integral-identity audit.
  double max_step = 0.0;
  /// Times the integrator must not step across (integration restarts there;
  /// used for kinked densities such as mollified atoms or bin edges).
  std::vector<double> breakpoints;
  /// Extra times forced into the sample set.
  std::vector<double> record_times;
  bool check_domain = true;
};

/// Solves xdot = f(t,x) + g(t,x) v, x(t0-) = x0 over (t0, T): adaptive
/// embedded RK45 between atoms, fast-time RK4 across them. An atom exactly
/// at t0 fires immediately. Domain exit (slow or fast) yields a partial
/// trajectory with an exit record rather than an error.
DynamicTrajectory solve_ivp(const SystemSpec& system, const ImpulseControl& control, double t0,
                            const Eigen::VectorXd& x0, double T, const SolveOptions& opts = {});

struct ContractionResult {
  double h = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  /// Sup-norm distances between successive Picard iterates.
  std::vector<double> step_norms;
  DynamicTrajectory trajectory;
};

/// Picard iteration on the integral form of the initial value problem over a
/// window (t0-h, t0+h) chosen so the contraction constant
///   lambda = K_f h + K_g var(u) h + K_g var(u)^2
/// is below 1 (atoms exactly at t0 are pinned by the initial condition and
/// excluded from var). Requires Lipschitz hints and an interior x0 with
/// margin n_bound.
ContractionResult contraction_solve(const SystemSpec& system, const ImpulseControl& control,
                                    double t0, const Eigen::VectorXd& x0, double n_bound,
                                    const SolveOptions& opts = {});

struct DependenceDistance {
  double slow = 0.0;
  double fast = 0.0;
  double total = 0.0;
};

/// Sup-norm distance between the solutions under two controls with matching
/// atom times; slow paths and fast transits are reported separately.
DependenceDistance continuous_dependence_probe(const SystemSpec& system,
                                               const ImpulseControl& control,
                                               const ImpulseControl& perturbed, double t0,
                                               const Eigen::VectorXd& x0, double T,
                                               const SolveOptions& opts = {});

/// Max over recorded samples of the defect in the integral identity
///   x(t) - x0 = int f + int g w + sum of jump increments.
/// Uses Hermite/Simpson quadrature on the recorded slow path.
double representation_defect(const SystemSpec& system, const ImpulseControl& control,
                             const DynamicTrajectory& trajectory, const Eigen::VectorXd& x0);

}  // namespace ivt

#endif
