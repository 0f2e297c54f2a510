#ifndef IVT_REGULARIZE_HPP
#define IVT_REGULARIZE_HPP

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ivt/control.hpp"
#include "ivt/solve.hpp"
#include "ivt/system.hpp"
#include "ivt/trajectory.hpp"

namespace ivt {

/// Mollified atom: t -> <c, omega_n(t)> with omega_n(t) = n alpha(n (t-tau))
/// on (tau - 1/(2n), tau + 1/(2n)) and 0 elsewhere. Support width 1/n,
/// integral c.
std::function<Eigen::VectorXd(double)> delta_sequence_term(const ImpulseAtom& atom, int n);

/// Classical solve with every atom replaced by its width-1/n mollification
/// folded into the density; no jumps. Mollified supports must be pairwise
/// disjoint and inside the horizon ("n too small" otherwise). Integrator
/// tolerance is tightened to tol/n.
DynamicTrajectory regularized_solve(const SystemSpec& system, const ImpulseControl& control, int n,
                                    double t0, const Eigen::VectorXd& x0, double T,
                                    const SolveOptions& opts = {});

struct ConvergenceRow {
  int n = 0;
  double probe_t = 0.0;
  double distance = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  /// Sup distance over the probes, one entry per n.
  std::vector<double> sup_per_n;
  bool converged = false;
};

/// Distances |x_n(t) - x(t)| at probe times for each n in n_list. Probes
/// must keep distance > 1/(2 min n) from every atom. Converged means the
/// final sup distance is below 1e-3 and the sequence decreases over the last
/// three entries.
ConvergenceReport convergence_report(const SystemSpec& system, const ImpulseControl& control,
                                     double t0, const Eigen::VectorXd& x0, double T,
                                     const std::vector<int>& n_list,
                                     const std::vector<double>& probes,
                                     const SolveOptions& opts = {});

}  // namespace ivt

#endif
