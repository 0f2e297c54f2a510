#include "ivt/solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ivt/errors.hpp"
#include "ivt/jump.hpp"
#include "ivt/quadrature.hpp"

namespace ivt {

namespace {

Eigen::VectorXd slow_rhs(const SystemSpec& system, const ImpulseControl& control, double t,
                         const Eigen::VectorXd& x) {
  Eigen::VectorXd v = system.f(t, x);
  if (control.has_density()) v += system.g_slow(t, x) * control.density(t);
  if (!v.allFinite()) throw EvalError("non-finite right-hand side at t = " + std::to_string(t));
  return v;
}

Eigen::VectorXd hermite(double t, double ta, const Eigen::VectorXd& xa, const Eigen::VectorXd& da,
                        double tb, const Eigen::VectorXd& xb, const Eigen::VectorXd& db) {
  const double h = tb - ta;
  const double u = (t - ta) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return h00 * xa + h10 * h * da + h01 * xb + h11 * h * db;
}

/// Embedded Dormand-Prince 5(4) stepper over one continuous stretch.
class SlowIntegrator {
 public:
  SlowIntegrator(const SystemSpec& system, const ImpulseControl& control,
                 const SolveOptions& opts, double span, DynamicTrajectory& out)
      : system_(system), control_(control), opts_(opts), out_(out) {
    h_ = opts.initial_step > 0 ? opts.initial_step : span / 100.0;
    if (opts.max_step > 0) h_ = std::min(h_, opts.max_step);
  }

  /// Advances y from t_from to t_to, appending accepted steps to the
  /// trajectory. Returns false when the domain box was exited (exit record
  /// set; integration must stop).
  bool run(double t_from, double t_to, Eigen::VectorXd& y) {
    double t = t_from;
    Eigen::VectorXd k1 = slow_rhs(system_, control_, t, y);
    while (t < t_to) {
      double h = h_;
      if (opts_.max_step > 0) h = std::min(h, opts_.max_step);
      bool last = false;
      if (h >= t_to - t) {
        h = t_to - t;  // closing step, lands exactly on the segment end
        last = true;
      } else if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw ConvergenceError("step size underflow at t = " + std::to_string(t));
      }

      const Eigen::VectorXd k2 = rhs(t + h * (1.0 / 5), y + h * (1.0 / 5) * k1);
      const Eigen::VectorXd k3 = rhs(t + h * (3.0 / 10), y + h * ((3.0 / 40) * k1 + (9.0 / 40) * k2));
      const Eigen::VectorXd k4 =
          rhs(t + h * (4.0 / 5), y + h * ((44.0 / 45) * k1 - (56.0 / 15) * k2 + (32.0 / 9) * k3));
      const Eigen::VectorXd k5 =
          rhs(t + h * (8.0 / 9), y + h * ((19372.0 / 6561) * k1 - (25360.0 / 2187) * k2 +
                                          (64448.0 / 6561) * k3 - (212.0 / 729) * k4));
      const Eigen::VectorXd k6 =
          rhs(t + h, y + h * ((9017.0 / 3168) * k1 - (355.0 / 33) * k2 + (46732.0 / 5247) * k3 +
                              (49.0 / 176) * k4 - (5103.0 / 18656) * k5));
      const Eigen::VectorXd y5 =
          y + h * ((35.0 / 384) * k1 + (500.0 / 1113) * k3 + (125.0 / 192) * k4 -
                   (2187.0 / 6784) * k5 + (11.0 / 84) * k6);
      const Eigen::VectorXd k7 = rhs(t + h, y5);
      const Eigen::VectorXd err =
          h * ((71.0 / 57600) * k1 - (71.0 / 16695) * k3 + (71.0 / 1920) * k4 -
               (17253.0 / 339200) * k5 + (22.0 / 525) * k6 - (1.0 / 40) * k7);

      double norm = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale = opts_.tol + opts_.tol * std::max(std::abs(y(i)), std::abs(y5(i)));
        norm = std::max(norm, std::abs(err(i)) / scale);
      }

      if (norm <= 1.0) {
        const double t_new = last ? t_to : t + h;  // land exactly on the segment end
        if (opts_.check_domain && !system_.domain.contains(t_new, y5)) {
          record_domain_exit(t, y, k1, t_new, y5, k7);
          return false;
        }
        t = t_new;
        y = y5;
        out_.samples.push_back({t, SampleSide::interior, y, k7});
        k1 = k7;  // first-same-as-last
        if (!last) {
          // a clipped closing step must not poison the carried step size
          const double grow = norm > 0 ? opts_.safety * std::pow(norm, -0.2) : 5.0;
          h_ = h * std::clamp(grow, 0.2, 5.0);
        }
      } else {
        h_ = h * std::max(0.2, opts_.safety * std::pow(norm, -0.2));
      }
    }
    return true;
  }

 private:
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x) {
    return slow_rhs(system_, control_, t, x);
  }

  void record_domain_exit(double ta, const Eigen::VectorXd& xa, const Eigen::VectorXd& da,
                          double tb, const Eigen::VectorXd& xb, const Eigen::VectorXd& db) {
    // bisect the crossing within the step on the Hermite interpolant
    double lo = ta, hi = tb;
    for (int i = 0; i < 60 && hi - lo > 1e-12 * std::max(1.0, std::abs(tb)); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (system_.domain.contains(mid, hermite(mid, ta, xa, da, tb, xb, db)))
        lo = mid;
      else
        hi = mid;
    }
    const Eigen::VectorXd x_exit = hermite(lo, ta, xa, da, tb, xb, db);
    out_.samples.push_back({lo, SampleSide::interior, x_exit, da});
    ExitRecord rec;
    rec.fast = false;
    rec.t = hi;
    rec.x = xb;
    rec.reason = "trajectory left the domain box";
    out_.exit = rec;
  }

  const SystemSpec& system_;
  const ImpulseControl& control_;
  const SolveOptions& opts_;
  DynamicTrajectory& out_;
  double h_;
};

std::vector<double> stops_between(const SolveOptions& opts, double a, double b) {
  std::vector<double> stops;
  for (double v : opts.breakpoints)
    if (v > a && v < b) stops.push_back(v);
  for (double v : opts.record_times)
    if (v > a && v < b) stops.push_back(v);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(b);
  return stops;
}

}  // namespace

DynamicTrajectory solve_ivp(const SystemSpec& system, const ImpulseControl& control, double t0,
                            const Eigen::VectorXd& x0, double T, const SolveOptions& opts_in) {
  if (!(t0 < T)) throw ContractError("empty horizon");
  if (control.dim() != system.n || x0.size() != system.n)
    throw ContractError("dimension mismatch between system, control and x0");
  for (const auto& atom : control.atoms()) {
    if (atom.tau < t0 || atom.tau >= T)
      throw ContractError("atom at tau = " + std::to_string(atom.tau) +
                          " lies outside the horizon");
  }

  SolveOptions opts = opts_in;
  if (opts.max_step <= 0) opts.max_step = (T - t0) / 128.0;

  DynamicTrajectory traj;
  traj.n = system.n;
  Eigen::VectorXd y = x0;

  if (opts.check_domain && !system.domain.contains(t0, x0)) {
    traj.samples.push_back({t0, SampleSide::interior, y, Eigen::VectorXd::Zero(system.n)});
    ExitRecord rec;
    rec.fast = false;
    rec.t = t0;
    rec.x = x0;
    rec.reason = "initial state outside the domain box";
    traj.exit = rec;
    return traj;
  }

  const auto& atoms = control.atoms();
  size_t next_atom = 0;

  auto resolve_jump = [&](const ImpulseAtom& atom) -> bool {
    // left limit
    if (traj.samples.empty() || traj.samples.back().t != atom.tau) {
      traj.samples.push_back({atom.tau, SampleSide::left, y, slow_rhs(system, control, atom.tau, y)});
    } else {
      traj.samples.back().side = SampleSide::left;
    }
    try {
      FastCurve coarse = solve_limit_system(system, atom.tau, y, atom, opts.fast_steps);
      FastCurve fine = solve_limit_system(system, atom.tau, y, atom, 2 * opts.fast_steps);
      const double delta = (fine.exitpoint() - coarse.exitpoint()).lpNorm<Eigen::Infinity>();
      if (delta >= opts.richardson_tol)
        throw ConvergenceError("jump at tau = " + std::to_string(atom.tau) +
                               " not converged: doubling fast steps moved gamma(1/2) by " +
                               std::to_string(delta));
      y = fine.exitpoint();
      traj.jumps.push_back(std::move(fine));
    } catch (const JumpEscapeError& e) {
      ExitRecord rec;
      rec.fast = true;
      rec.t = atom.tau;
      rec.s = e.s;
      rec.x = e.state;
      rec.reason = e.what();
      traj.exit = rec;
      return false;
    }
    traj.samples.push_back({atom.tau, SampleSide::right, y, slow_rhs(system, control, atom.tau, y)});
    return true;
  };

  // an atom exactly at t0 fires immediately, before any slow motion
  if (next_atom < atoms.size() && atoms[next_atom].tau == t0) {
    if (!resolve_jump(atoms[next_atom])) return traj;
    ++next_atom;
  } else {
    traj.samples.push_back({t0, SampleSide::interior, y, slow_rhs(system, control, t0, y)});
  }

  SlowIntegrator stepper(system, control, opts, T - t0, traj);
  double t = t0;
  while (t < T) {
    const double seg_end = next_atom < atoms.size() ? atoms[next_atom].tau : T;
    for (double stop : stops_between(opts, t, seg_end)) {
      if (!stepper.run(t, stop, y)) return traj;
      t = stop;
    }
    if (next_atom < atoms.size()) {
      if (!resolve_jump(atoms[next_atom])) return traj;
      ++next_atom;
    }
  }
  return traj;
}

namespace {

struct PicardSide {
  // node times ordered away from t0 (forward: increasing; backward: decreasing)
  std::vector<double> times;
  std::vector<int> atom_index;  // -1 when no atom at the node
};

PicardSide build_side(double t0, double h, bool forward, const std::vector<ImpulseAtom>& atoms,
                      int resolution) {
  PicardSide side;
  side.times.resize(resolution + 1);
  for (int j = 0; j <= resolution; ++j) {
    const double u = h * static_cast<double>(j) / resolution;
    side.times[j] = forward ? t0 + u : t0 - u;
  }
  // splice interior atom times into the grid
  for (const auto& atom : atoms) {
    const double tau = atom.tau;
    const bool inside = forward ? (tau > t0 && tau < t0 + h) : (tau < t0 && tau > t0 - h);
    if (!inside) continue;
    auto cmp = [forward](double a, double b) { return forward ? a < b : a > b; };
    auto it = std::lower_bound(side.times.begin(), side.times.end(), tau, cmp);
    if (it != side.times.end() && *it == tau) continue;
    side.times.insert(it, tau);
  }
  side.atom_index.assign(side.times.size(), -1);
  // node 0 is t0 itself; an atom there is pinned by the initial condition
  // and handled separately
  for (size_t k = 0; k < atoms.size(); ++k) {
    for (size_t j = 1; j < side.times.size(); ++j) {
      if (side.times[j] == atoms[k].tau) side.atom_index[j] = static_cast<int>(k);
    }
  }
  return side;
}

}  // namespace

ContractionResult contraction_solve(const SystemSpec& system, const ImpulseControl& control,
                                    double t0, const Eigen::VectorXd& x0, double n_bound,
                                    const SolveOptions& opts) {
  if (!system.lipschitz.f || !system.lipschitz.g)
    throw ContractError("contraction_solve needs Lipschitz hints");
  if (system.domain.state_margin(x0) <= n_bound)
    throw ContractError("x0 is not interior to the domain with margin n_bound");
  const double Kf = *system.lipschitz.f;
  const double Kg = *system.lipschitz.g;

  const double t_margin =
      std::min(t0 - system.domain.t_lo, system.domain.t_hi - t0);
  double h = std::min(0.4, 0.9 * t_margin);
  if (h <= 0) throw ContractError("t0 has no interior time margin");

  const auto& atoms = control.atoms();
  std::string last_failure = "lambda never fell below 1";

  for (int attempt = 0; attempt < 60; ++attempt, h *= 0.5) {
    if (h < 1e-8) break;
    // total variation of the primitive of the control over the open window;
    // an atom exactly at t0 is pinned by the initial condition and excluded
    double var = 0.0;
    if (control.has_density()) {
      const int m = 256;
      Eigen::VectorXd mags(m + 1);
      for (int i = 0; i <= m; ++i) {
        const double t = t0 - h + 2.0 * h * i / m;
        mags(i) = control.density(t).lpNorm<Eigen::Infinity>();
      }
      var += trapezoid_uniform(mags, t0 - h, t0 + h);
    }
    for (const auto& atom : atoms) {
      if (atom.tau > t0 - h && atom.tau < t0 + h && atom.tau != t0)
        var += atom.c.lpNorm<Eigen::Infinity>();
    }
    const double lambda = Kf * h + Kg * var * h + Kg * var * var;
    if (lambda >= 1.0) continue;

    constexpr int kResolution = 2048;
    const PicardSide fwd = build_side(t0, h, true, atoms, kResolution);
    const PicardSide bwd = build_side(t0, h, false, atoms, kResolution);

    // pinned jump of an atom exactly at t0
    Eigen::VectorXd pinned = Eigen::VectorXd::Zero(system.n);
    bool has_pinned = false;
    for (const auto& atom : atoms) {
      if (atom.tau == t0) {
        pinned = solve_limit_system(system, t0, x0, atom, opts.fast_steps).exitpoint() - x0;
        has_pinned = true;
      }
    }

    auto integrand = [&](double t, const Eigen::VectorXd& x) {
      return slow_rhs(system, control, t, x);
    };

    std::vector<Eigen::VectorXd> yf(fwd.times.size(), x0), yb(bwd.times.size(), x0);
    ContractionResult result;
    result.h = h;
    result.lambda = lambda;

    bool escaped = false;
    for (int iter = 0; iter < 200; ++iter) {
      // resolve interior jumps from the current iterate's left limits
      std::vector<Eigen::VectorXd> jump_f(fwd.times.size(), Eigen::VectorXd::Zero(system.n));
      std::vector<Eigen::VectorXd> jump_b(bwd.times.size(), Eigen::VectorXd::Zero(system.n));
      for (size_t j = 0; j < fwd.times.size(); ++j) {
        if (fwd.atom_index[j] >= 0)
          jump_f[j] = solve_limit_system(system, fwd.times[j], yf[j],
                                         atoms[static_cast<size_t>(fwd.atom_index[j])],
                                         opts.fast_steps)
                          .exitpoint() -
                      yf[j];
      }
      for (size_t j = 1; j < bwd.times.size(); ++j) {
        if (bwd.atom_index[j] >= 0)
          jump_b[j] = solve_limit_system(system, bwd.times[j], yb[j],
                                         atoms[static_cast<size_t>(bwd.atom_index[j])],
                                         opts.fast_steps)
                          .exitpoint() -
                      yb[j];
      }

      double diff = 0.0;
      // forward sweep: x(t) = x0 + int_{t0}^{t} I + sum_{t0 <= tau < t} jumps
      {
        std::vector<Eigen::VectorXd> ynew(fwd.times.size());
        ynew[0] = x0;
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(system.n);
        Eigen::VectorXd jumps = has_pinned ? pinned : Eigen::VectorXd::Zero(system.n);
        Eigen::VectorXd I_right = integrand(fwd.times[0], x0 + jumps);
        for (size_t j = 1; j < fwd.times.size(); ++j) {
          const double dt = fwd.times[j] - fwd.times[j - 1];
          const Eigen::VectorXd I_left = integrand(fwd.times[j], yf[j]);
          integral += 0.5 * dt * (I_right + I_left);
          ynew[j] = x0 + integral + jumps;
          if (fwd.atom_index[j] >= 0) {
            jumps += jump_f[j];
            I_right = integrand(fwd.times[j], yf[j] + jump_f[j]);
          } else {
            I_right = integrand(fwd.times[j], yf[j]);
          }
        }
        for (size_t j = 0; j < fwd.times.size(); ++j) {
          diff = std::max(diff, (ynew[j] - yf[j]).lpNorm<Eigen::Infinity>());
          if ((ynew[j] - x0).lpNorm<Eigen::Infinity>() > n_bound) escaped = true;
        }
        yf = std::move(ynew);
      }
      // backward sweep: x(t) = x0 - int_{t}^{t0} I - sum_{t <= tau < t0} jumps
      {
        std::vector<Eigen::VectorXd> ynew(bwd.times.size());
        ynew[0] = x0;
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(system.n);
        Eigen::VectorXd jumps = Eigen::VectorXd::Zero(system.n);
        Eigen::VectorXd I_right = integrand(bwd.times[0], yb[0]);
        for (size_t j = 1; j < bwd.times.size(); ++j) {
          const double dt = bwd.times[j - 1] - bwd.times[j];
          const Eigen::VectorXd I_left =
              integrand(bwd.times[j], yb[j] + (bwd.atom_index[j] >= 0 ? jump_b[j]
                                                                       : Eigen::VectorXd::Zero(
                                                                             system.n)));
          integral += 0.5 * dt * (I_right + I_left);
          if (bwd.atom_index[j] >= 0) jumps += jump_b[j];
          ynew[j] = x0 - integral - jumps;
          I_right = integrand(bwd.times[j], yb[j]);
        }
        for (size_t j = 0; j < bwd.times.size(); ++j) {
          diff = std::max(diff, (ynew[j] - yb[j]).lpNorm<Eigen::Infinity>());
          if ((ynew[j] - x0).lpNorm<Eigen::Infinity>() > n_bound) escaped = true;
        }
        yb = std::move(ynew);
      }

      if (escaped) break;
      result.step_norms.push_back(diff);
      result.iterations = iter + 1;
      if (diff < 1e-10) {
        // assemble the trajectory: backward nodes reversed, then forward
        DynamicTrajectory traj;
        traj.n = system.n;
        for (size_t j = bwd.times.size(); j-- > 1;) {
          const auto side =
              bwd.atom_index[j] >= 0 ? SampleSide::left : SampleSide::interior;
          traj.samples.push_back({bwd.times[j], side, yb[j], integrand(bwd.times[j], yb[j])});
          if (bwd.atom_index[j] >= 0) {
            FastCurve curve = solve_limit_system(system, bwd.times[j], yb[j],
                                                 atoms[static_cast<size_t>(bwd.atom_index[j])],
                                                 opts.fast_steps);
            Eigen::VectorXd xp = curve.exitpoint();
            traj.jumps.push_back(std::move(curve));
            traj.samples.push_back({bwd.times[j], SampleSide::right, xp,
                                    integrand(bwd.times[j], xp)});
          }
        }
        for (size_t j = 0; j < fwd.times.size(); ++j) {
          const bool atom_here = fwd.atom_index[j] >= 0 || (j == 0 && has_pinned);
          const auto side = atom_here ? SampleSide::left : SampleSide::interior;
          traj.samples.push_back({fwd.times[j], side, yf[j], integrand(fwd.times[j], yf[j])});
          if (atom_here) {
            const ImpulseAtom* atom = nullptr;
            if (j == 0 && has_pinned) {
              for (const auto& a : atoms)
                if (a.tau == t0) atom = &a;
            } else {
              atom = &atoms[static_cast<size_t>(fwd.atom_index[j])];
            }
            FastCurve curve =
                solve_limit_system(system, fwd.times[j], yf[j], *atom, opts.fast_steps);
            Eigen::VectorXd xp = curve.exitpoint();
            traj.jumps.push_back(std::move(curve));
            traj.samples.push_back({fwd.times[j], SampleSide::right, xp,
                                    integrand(fwd.times[j], xp)});
          }
        }
        result.trajectory = std::move(traj);
        return result;
      }
    }
    last_failure = escaped ? "iterates escaped the n_bound ball" : "Picard iteration stalled";
  }
  throw ConvergenceError("no contraction window: " + last_failure);
}

DependenceDistance continuous_dependence_probe(const SystemSpec& system,
                                               const ImpulseControl& control,
                                               const ImpulseControl& perturbed, double t0,
                                               const Eigen::VectorXd& x0, double T,
                                               const SolveOptions& opts) {
  if (control.atoms().size() != perturbed.atoms().size())
    throw ContractError("controls must carry matching atom times");
  for (size_t k = 0; k < control.atoms().size(); ++k) {
    if (control.atoms()[k].tau != perturbed.atoms()[k].tau)
      throw ContractError("controls must carry matching atom times");
  }
  const DynamicTrajectory a = solve_ivp(system, control, t0, x0, T, opts);
  const DynamicTrajectory b = solve_ivp(system, perturbed, t0, x0, T, opts);

  DependenceDistance out;
  const int grid = 1025;
  for (int i = 0; i < grid; ++i) {
    const double t = t0 + (T - t0) * static_cast<double>(i) / (grid - 1);
    out.slow = std::max(out.slow, (a.state_at(t) - b.state_at(t)).lpNorm<Eigen::Infinity>());
  }
  for (size_t k = 0; k < a.jumps.size() && k < b.jumps.size(); ++k) {
    for (int i = 0; i <= 256; ++i) {
      const double s = kFastLo + (kFastHi - kFastLo) * static_cast<double>(i) / 256;
      out.fast =
          std::max(out.fast, (a.jumps[k].at(s) - b.jumps[k].at(s)).lpNorm<Eigen::Infinity>());
    }
  }
  out.total = std::max(out.slow, out.fast);
  return out;
}

double representation_defect(const SystemSpec& system, const ImpulseControl& control,
                             const DynamicTrajectory& trajectory, const Eigen::VectorXd& x0) {
  if (trajectory.samples.empty()) return 0.0;
  auto integrand = [&](double t, const Eigen::VectorXd& x) {
    return slow_rhs(system, control, t, x);
  };

  double defect = 0.0;
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(trajectory.n);
  Eigen::VectorXd jumps = Eigen::VectorXd::Zero(trajectory.n);
  size_t jump_idx = 0;

  const auto& samples = trajectory.samples;
  for (size_t j = 0; j < samples.size(); ++j) {
    const auto& cur = samples[j];
    if (j > 0) {
      const auto& prev = samples[j - 1];
      if (cur.t == prev.t) {
        // atom pair: the fast transit carries the state across
        if (cur.side == SampleSide::right && jump_idx < trajectory.jumps.size()) {
          const auto& curve = trajectory.jumps[jump_idx++];
          jumps += curve.exitpoint() - curve.entry();
        }
      } else {
        const double tm = 0.5 * (prev.t + cur.t);
        const Eigen::VectorXd xm =
            hermite(tm, prev.t, prev.x, prev.dxdt, cur.t, cur.x, cur.dxdt);
        const Eigen::VectorXd Ia = integrand(prev.t, prev.x);
        const Eigen::VectorXd Im = integrand(tm, xm);
        const Eigen::VectorXd Ib = integrand(cur.t, cur.x);
        integral += (cur.t - prev.t) / 6.0 * (Ia + 4.0 * Im + Ib);
      }
    }
    const Eigen::VectorXd reconstructed = x0 + integral + jumps;
    defect = std::max(defect, (cur.x - reconstructed).lpNorm<Eigen::Infinity>());
  }
  return defect;
}

}  // namespace ivt
