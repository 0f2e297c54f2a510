#include "ivt/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivt/errors.hpp"

namespace ivt {

std::function<Eigen::VectorXd(double)> delta_sequence_term(const ImpulseAtom& atom, int n) {
  if (n < 1) throw ContractError("delta-sequence index must be >= 1");
  const double width = 1.0 / n;
  return [atom, n, width](double t) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(atom.dim());
    const double d = t - atom.tau;
    if (d <= -0.5 * width || d >= 0.5 * width) return out;
    const double s = n * d;  // mapped into J
    for (Eigen::Index i = 0; i < atom.c.size(); ++i)
      out(i) = atom.c(i) * n * atom.shapes[static_cast<size_t>(i)](s);
    return out;
  };
}

DynamicTrajectory regularized_solve(const SystemSpec& system, const ImpulseControl& control, int n,
                                    double t0, const Eigen::VectorXd& x0, double T,
                                    const SolveOptions& opts) {
  const auto& atoms = control.atoms();
  const double width = 1.0 / n;
  for (size_t k = 0; k < atoms.size(); ++k) {
    const double lo = atoms[k].tau - 0.5 * width;
    const double hi = atoms[k].tau + 0.5 * width;
    if (lo < t0 || hi > T)
      throw ContractError("n too small: mollified support of the atom at tau = " +
                          std::to_string(atoms[k].tau) + " leaves the horizon");
    if (k > 0 && atoms[k - 1].tau + 0.5 * width > lo)
      throw ContractError("n too small: mollified supports overlap");
  }

  std::vector<std::function<Eigen::VectorXd(double)>> terms;
  terms.reserve(atoms.size());
  for (const auto& atom : atoms) terms.push_back(delta_sequence_term(atom, n));

  const bool base_density = control.has_density();
  auto mollified = [&control, terms, base_density](double t) {
    Eigen::VectorXd v =
        base_density ? control.density(t) : Eigen::VectorXd::Zero(control.dim());
    for (const auto& term : terms) v += term(t);
    return v;
  };

  SolveOptions tuned = opts;
  tuned.tol = opts.tol / n;  // keep integrator error below the mollification error
  for (const auto& atom : atoms) {
    tuned.breakpoints.push_back(atom.tau - 0.5 * width);
    tuned.breakpoints.push_back(atom.tau + 0.5 * width);
    if (tuned.max_step <= 0 || tuned.max_step > 0.25 * width) tuned.max_step = 0.25 * width;
  }

  return solve_ivp(system, ImpulseControl(control.dim(), mollified), t0, x0, T, tuned);
}

ConvergenceReport convergence_report(const SystemSpec& system, const ImpulseControl& control,
                                     double t0, const Eigen::VectorXd& x0, double T,
                                     const std::vector<int>& n_list,
                                     const std::vector<double>& probes,
                                     const SolveOptions& opts) {
  if (n_list.empty()) throw ContractError("empty n list");
  const int n_min = *std::min_element(n_list.begin(), n_list.end());
  for (double p : probes) {
    for (const auto& atom : control.atoms()) {
      if (std::abs(p - atom.tau) <= 0.5 / n_min)
        throw ContractError("probe at t = " + std::to_string(p) +
                            " is inside the widest mollified support");
    }
  }

  SolveOptions probe_opts = opts;
  probe_opts.record_times.insert(probe_opts.record_times.end(), probes.begin(), probes.end());
  const DynamicTrajectory reference = solve_ivp(system, control, t0, x0, T, probe_opts);

  ConvergenceReport report;
  for (int n : n_list) {
    const DynamicTrajectory approx = regularized_solve(system, control, n, t0, x0, T, probe_opts);
    double sup = 0.0;
    for (double p : probes) {
      const double d = (approx.state_at(p) - reference.state_at(p)).lpNorm<Eigen::Infinity>();
      report.rows.push_back({n, p, d});
      sup = std::max(sup, d);
    }
    report.sup_per_n.push_back(sup);
  }

  const auto& sups = report.sup_per_n;
  bool decreasing = sups.size() >= 3;
  for (size_t i = sups.size() >= 3 ? sups.size() - 3 : 0; i + 1 < sups.size(); ++i)
    decreasing = decreasing && sups[i + 1] <= sups[i];
  report.converged = !sups.empty() && sups.back() < 1e-3 && decreasing;
  return report;
}

}  // namespace ivt
