#include "ivt/avoidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivt/errors.hpp"

namespace ivt {

namespace {

Eigen::VectorXd hermite_state(const TrajectorySample& a, const TrajectorySample& b, double t) {
  const double h = b.t - a.t;
  const double u = (t - a.t) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return h00 * a.x + h10 * h * a.dxdt + h01 * b.x + h11 * h * b.dxdt;
}

}  // namespace

ViabilityTime viability_time(const SystemSpec& system, const ImpulseControl& control, double t0,
                             const Eigen::VectorXd& x0, const ConstraintSet& M, double T_max,
                             double time_tol, double eta_slack, const SolveOptions& opts) {
  if (M.max_eta(x0) > eta_slack) throw ContractError("x0 is not inside the constraint set");

  SolveOptions tuned = opts;
  if (tuned.max_step <= 0) tuned.max_step = (T_max - t0) / 128.0;
  const DynamicTrajectory traj = solve_ivp(system, control, t0, x0, T_max, tuned);

  ViabilityTime out;
  size_t jump_idx = 0;
  const auto& samples = traj.samples;
  for (size_t j = 0; j < samples.size(); ++j) {
    const auto& sample = samples[j];
    int which = -1;
    for (int i = 0; i < M.count() && which < 0; ++i) {
      if (M.eta(i, sample.x) > eta_slack) which = i;
    }
    if (which >= 0) {
      // slow exit: bisect between the previous viable sample and this one
      double T = sample.t;
      if (j > 0 && samples[j - 1].t < sample.t) {
        const auto& prev = samples[j - 1];
        double lo = prev.t, hi = sample.t;
        while (hi - lo > time_tol) {
          const double mid = 0.5 * (lo + hi);
          if (M.max_eta(hermite_state(prev, sample, mid)) > eta_slack)
            hi = mid;
          else
            lo = mid;
        }
        T = hi;
      }
      out.T = T;
      out.outcome = ViabilityOutcome::exited_slow;
      out.exit = AuditExit{false, T, 0.0, which, sample.x};
      return out;
    }
    if (sample.side == SampleSide::left && jump_idx < traj.jumps.size()) {
      const auto& curve = traj.jumps[jump_idx++];
      for (Eigen::Index c = 0; c < curve.s.size(); ++c) {
        for (int i = 0; i < M.count(); ++i) {
          if (M.eta(i, curve.states.col(c)) > eta_slack) {
            out.T = curve.tau;
            out.outcome = ViabilityOutcome::exited_fast;
            out.exit = AuditExit{true, curve.tau, curve.s(c), i, curve.states.col(c)};
            return out;
          }
        }
      }
    }
  }
  if (traj.exit) {
    // left the domain box while still inside M: report the escape time
    out.T = traj.exit->t;
    out.outcome = traj.exit->fast ? ViabilityOutcome::exited_fast : ViabilityOutcome::exited_slow;
    out.exit = AuditExit{traj.exit->fast, traj.exit->t, traj.exit->s, -1, traj.exit->x};
    return out;
  }
  out.T = T_max;
  out.outcome = ViabilityOutcome::survived;
  return out;
}

SingleAtomSearch search_single_atom(const SystemSpec& system, double t0,
                                    const Eigen::VectorXd& x0, const ConstraintSet& M,
                                    double budget, const std::vector<double>& tau_grid,
                                    const std::vector<Eigen::VectorXd>& c_grid, const Shape& shape,
                                    double T_max, const SolveOptions& opts) {
  if (tau_grid.empty() || c_grid.empty()) throw ContractError("empty admissible grid");

  SingleAtomSearch out;
  const ViabilityTime baseline =
      viability_time(system, ImpulseControl::zero(system.n), t0, x0, M, T_max, 1e-6, 1e-9, opts);
  out.baseline_T = baseline.T;
  out.best.tau = t0;
  out.best.c = Eigen::VectorXd::Zero(system.n);
  out.best.T = baseline.T;
  out.best.outcome = baseline.outcome;
  out.best_is_baseline = true;

  for (double tau : tau_grid) {
    for (const auto& c : c_grid) {
      AtomCandidate cand;
      cand.tau = tau;
      cand.c = c;
      if (c.lpNorm<Eigen::Infinity>() == 0.0) {
        // degenerate grid entry: identical to the zero control
        cand.T = baseline.T;
        cand.outcome = baseline.outcome;
        out.table.push_back(std::move(cand));
        continue;
      }
      ImpulseControl control(system.n, {ImpulseAtom(tau, c, shape)});
      cand.admissible = check_admissible(control, budget, t0, T_max).admissible;
      if (cand.admissible) {
        const ViabilityTime vt = viability_time(system, control, t0, x0, M, T_max, 1e-6, 1e-9, opts);
        cand.T = vt.T;
        cand.outcome = vt.outcome;
        const bool better =
            cand.T > out.best.T + 1e-12 ||
            (std::abs(cand.T - out.best.T) <= 1e-12 &&
             (cand.tau < out.best.tau ||
              (cand.tau == out.best.tau && cand.c.lpNorm<Eigen::Infinity>() <
                                               out.best.c.lpNorm<Eigen::Infinity>())));
        if (better) {
          out.best = cand;
          out.best_is_baseline = false;
        }
      }
      out.table.push_back(std::move(cand));
    }
  }
  return out;
}

namespace {

void multi_atom_recurse(const SystemSpec& system, double t0, const Eigen::VectorXd& x0,
                        const ConstraintSet& M, double budget,
                        const std::vector<double>& tau_grid,
                        const std::vector<Eigen::VectorXd>& c_grid, const Shape& shape,
                        int max_atoms, double T_max, const SolveOptions& opts,
                        size_t next_tau_index, std::vector<double>& taus,
                        std::vector<Eigen::VectorXd>& cs, MultiAtomSearch& out) {
  if (!taus.empty()) {
    ++out.evaluated;
    std::vector<ImpulseAtom> atoms;
    for (size_t i = 0; i < taus.size(); ++i) atoms.emplace_back(taus[i], cs[i], shape);
    ImpulseControl control(system.n, std::move(atoms));
    if (check_admissible(control, budget, t0, T_max).admissible) {
      ++out.admissible;
      const ViabilityTime vt = viability_time(system, control, t0, x0, M, T_max, 1e-6, 1e-9, opts);
      // ties prefer fewer atoms; the zero-control baseline counts as zero atoms
      const bool better = vt.T > out.best.T + 1e-12 ||
                          (!out.best_is_baseline && std::abs(vt.T - out.best.T) <= 1e-12 &&
                           taus.size() < out.best.taus.size());
      if (better) {
        out.best = {taus, cs, vt.T};
        out.best_is_baseline = false;
      }
    }
  }
  if (static_cast<int>(taus.size()) >= max_atoms) return;
  for (size_t i = next_tau_index; i < tau_grid.size(); ++i) {
    for (const auto& c : c_grid) {
      if (c.lpNorm<Eigen::Infinity>() == 0.0) continue;
      taus.push_back(tau_grid[i]);
      cs.push_back(c);
      multi_atom_recurse(system, t0, x0, M, budget, tau_grid, c_grid, shape, max_atoms, T_max,
                         opts, i + 1, taus, cs, out);
      taus.pop_back();
      cs.pop_back();
    }
  }
}

}  // namespace

MultiAtomSearch search_multi_atom(const SystemSpec& system, double t0, const Eigen::VectorXd& x0,
                                  const ConstraintSet& M, double budget,
                                  const std::vector<double>& tau_grid,
                                  const std::vector<Eigen::VectorXd>& c_grid, const Shape& shape,
                                  int max_atoms, double T_max, const SolveOptions& opts) {
  if (tau_grid.empty() || c_grid.empty()) throw ContractError("empty admissible grid");
  if (max_atoms < 1) throw ContractError("max_atoms must be positive");
  max_atoms = std::min(max_atoms, 3);

  MultiAtomSearch out;
  const ViabilityTime baseline =
      viability_time(system, ImpulseControl::zero(system.n), t0, x0, M, T_max, 1e-6, 1e-9, opts);
  out.baseline_T = baseline.T;
  out.best.T = baseline.T;
  out.best_is_baseline = true;

  std::vector<double> taus;
  std::vector<Eigen::VectorXd> cs;
  multi_atom_recurse(system, t0, x0, M, budget, tau_grid, c_grid, shape, max_atoms, T_max, opts,
                     0, taus, cs, out);
  return out;
}

RegularSearch search_regular_controls(const SystemSpec& system, double t0,
                                      const Eigen::VectorXd& x0, const ConstraintSet& M,
                                      double budget, int bins, int levels, double window_end,
                                      double T_max, const SolveOptions& opts) {
  if (bins < 1 || bins > 8) throw ContractError("regular-control search supports 1..8 bins");
  if (levels < 1) throw ContractError("levels must be positive");
  if (!(t0 < window_end && window_end <= T_max))
    throw ContractError("bin window must sit inside the horizon");

  RegularSearch out;
  const double width = (window_end - t0) / bins;
  out.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) out.bin_edges[b] = t0 + width * b;

  SolveOptions tuned = opts;
  for (int b = 1; b < bins; ++b) tuned.breakpoints.push_back(out.bin_edges[b]);
  tuned.breakpoints.push_back(window_end);

  std::vector<int> counts(bins, 0);
  bool found = false;
  // enumerate lattice mass vectors with sum <= levels
  while (true) {
    int total = 0;
    for (int v : counts) total += v;
    if (total <= levels) {
      RegularCandidate cand;
      cand.masses.resize(bins);
      for (int b = 0; b < bins; ++b) cand.masses[b] = budget * counts[b] / levels;

      const auto edges = out.bin_edges;
      const auto masses = cand.masses;
      auto density = [edges, masses, width, bins](double t) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
        for (int b = 0; b < bins; ++b) {
          if (t >= edges[b] && t < edges[b + 1]) {
            w(0) = masses[b] / width;
            break;
          }
        }
        return w;
      };
      auto density_n = [density, n = system.n](double t) {
        return Eigen::VectorXd::Constant(n, density(t)(0));
      };
      ImpulseControl control(system.n, density_n);
      const ViabilityTime vt = viability_time(system, control, t0, x0, M, T_max, 1e-6, 1e-9, tuned);
      cand.T = vt.T;
      if (!found || cand.T > out.best.T + 1e-12) {
        out.best = cand;
        found = true;
      }
      out.table.push_back(std::move(cand));
    }
    // advance the lattice counter
    int b = 0;
    while (b < bins) {
      if (++counts[b] <= levels) break;
      counts[b] = 0;
      ++b;
    }
    if (b == bins) break;
  }
  return out;
}

}  // namespace ivt
