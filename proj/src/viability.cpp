#include "ivt/viability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "ivt/errors.hpp"
#include "ivt/sampling.hpp"

namespace ivt {

double ConstraintSet::max_eta(const Eigen::VectorXd& x) const {
  double m = -1e300;
  for (const auto& eta : etas) m = std::max(m, eta(x));
  return m;
}

ConstraintSet ConstraintSet::build(
    int n, std::vector<std::function<double(const Eigen::VectorXd&)>> etas,
    std::vector<std::function<Eigen::VectorXd(const Eigen::VectorXd&)>> analytic_grads, double h) {
  ConstraintSet M;
  M.n = n;
  M.etas = std::move(etas);
  M.grads.resize(M.etas.size());
  for (size_t i = 0; i < M.etas.size(); ++i) {
    if (i < analytic_grads.size() && analytic_grads[i]) {
      M.grads[i] = analytic_grads[i];
    } else {
      auto eta = M.etas[i];
      M.grads[i] = [eta, h](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(x.size());
        Eigen::VectorXd probe = x;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          probe(j) = x(j) + h;
          const double fp = eta(probe);
          probe(j) = x(j) - h;
          const double fm = eta(probe);
          probe(j) = x(j);
          g(j) = (fp - fm) / (2.0 * h);
        }
        return g;
      };
    }
  }
  return M;
}

ActiveSet active_set(const ConstraintSet& M, const Eigen::VectorXd& x, double eps) {
  if (eps <= 0) throw ContractError("active-set tolerance must be positive");
  ActiveSet out;
  for (int i = 0; i < M.count(); ++i) {
    if (std::abs(M.eta(i, x)) <= eps) out.indices.push_back(i);
  }
  if (!out.indices.empty()) {
    Eigen::MatrixXd G(static_cast<Eigen::Index>(out.indices.size()), M.n);
    for (size_t r = 0; r < out.indices.size(); ++r)
      G.row(static_cast<Eigen::Index>(r)) = M.grad(out.indices[r], x).transpose();
    if (G.rows() > G.cols()) {
      out.gradients_independent = false;
      out.smallest_singular_value = 0.0;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
      out.smallest_singular_value = svd.singularValues().minCoeff();
      out.gradients_independent = out.smallest_singular_value > 1e-8;
    }
  }
  return out;
}

ConeMembership contingent_membership(const ConstraintSet& M, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, double eps, double slack) {
  const ActiveSet act = active_set(M, x, eps);
  ConeMembership out;
  if (act.indices.empty()) {
    out.member = true;
    out.vacuous = true;  // interior point: every direction is admissible
    return out;
  }
  if (!act.gradients_independent)
    throw ContractError("active gradients are linearly dependent; the cone formula does not apply");
  out.worst_inner = -1e300;
  for (int i : act.indices) out.worst_inner = std::max(out.worst_inner, M.grad(i, x).dot(y));
  out.member = out.worst_inner <= slack;
  return out;
}

std::vector<Eigen::VectorXd> boundary_samples(const ConstraintSet& M, const Eigen::VectorXd& lo,
                                              const Eigen::VectorXd& hi, int count, double eps) {
  std::vector<Eigen::VectorXd> points;
  unsigned seed_index = 0;
  const int budget = count * 24;
  for (int attempt = 0; attempt < budget && static_cast<int>(points.size()) < count; ++attempt) {
    Eigen::VectorXd x = halton_in_box(seed_index++, lo, hi);
    const int constraint = attempt % M.count();
    bool projected = false;
    for (int it = 0; it < 60; ++it) {
      const double v = M.eta(constraint, x);
      if (std::abs(v) <= 0.5 * eps) {
        projected = true;
        break;
      }
      const Eigen::VectorXd g = M.grad(constraint, x);
      const double gg = g.squaredNorm();
      if (gg < 1e-16) break;  // flat spot, discard the seed
      Eigen::VectorXd step = -(v / gg) * g;
      // damp oversized Newton steps relative to the box scale
      const double scale = (hi - lo).lpNorm<Eigen::Infinity>();
      const double len = step.lpNorm<Eigen::Infinity>();
      if (len > 0.5 * scale) step *= 0.5 * scale / len;
      x += step;
    }
    if (!projected) continue;
    // keep only genuine boundary points of M
    bool inside = true;
    for (int i = 0; i < M.count(); ++i) inside = inside && M.eta(i, x) <= eps;
    if (inside && M.max_eta(x) >= -eps) points.push_back(x);
  }
  return points;
}

namespace {

int default_boundary_count(int n) { return n <= 2 ? 256 : 1024; }

struct ConditionScan {
  bool ok = true;
  double worst = -1e300;
  Counterexample witness;
};

/// Applies the direction field to every boundary sample / active pair.
template <typename DirectionFn>
void scan_direction(const ConstraintSet& M, const std::vector<Eigen::VectorXd>& boundary,
                    const CertificateOptions& opts, ViabilityCertificate& cert,
                    DirectionFn&& direction, std::optional<double> t, std::optional<double> s,
                    std::optional<int> atom) {
  for (const auto& x : boundary) {
    const ActiveSet act = active_set(M, x, opts.active_eps);
    if (!act.gradients_independent) {
      cert.hypothesis_issues.push_back("active gradients dependent at a boundary sample");
      continue;
    }
    if (act.indices.empty()) continue;
    const Eigen::VectorXd dir = direction(x);
    double worst = -1e300;
    int worst_i = -1;
    for (int i : act.indices) {
      const double inner = M.grad(i, x).dot(dir);
      if (inner > worst) {
        worst = inner;
        worst_i = i;
      }
    }
    BoundaryCheck check;
    check.x = x;
    check.active = act.indices;
    check.worst_inner = worst;
    cert.samples.push_back(check);
    if (worst > opts.slack && cert.pass) {
      cert.pass = false;
      Counterexample ce;
      ce.x = x;
      ce.constraint = worst_i;
      ce.t = t;
      ce.s = s;
      ce.atom = atom;
      ce.inner = worst;
      cert.counterexample = ce;
    }
  }
}

std::vector<Eigen::VectorXd> certificate_boundary(const SystemSpec& system,
                                                  const ConstraintSet& M,
                                                  const CertificateOptions& opts) {
  const int count = opts.boundary_count > 0 ? opts.boundary_count : default_boundary_count(M.n);
  Eigen::VectorXd lo(M.n), hi(M.n);
  for (int i = 0; i < M.n; ++i) {
    lo(i) = system.domain.x_lo.size() ? system.domain.x_lo(i) : -1.0;
    hi(i) = system.domain.x_hi.size() ? system.domain.x_hi(i) : 1.0;
  }
  auto pts = boundary_samples(M, lo, hi, count, opts.active_eps);
  if (pts.empty()) throw ContractError("empty boundary sample");
  return pts;
}

}  // namespace

ViabilityCertificate nagumo_check(const SystemSpec& system, const ConstraintSet& M, double t0,
                                  double T, const CertificateOptions& opts) {
  ViabilityCertificate cert;
  cert.mode = CertificateMode::nagumo;
  cert.pass = true;
  cert.slack = opts.slack;
  const auto boundary = certificate_boundary(system, M, opts);
  for (int k = 0; k < opts.t_samples; ++k) {
    const double t = t0 + (T - t0) * static_cast<double>(k) / std::max(1, opts.t_samples - 1);
    scan_direction(
        M, boundary, opts, cert, [&](const Eigen::VectorXd& x) { return system.f(t, x); }, t,
        std::nullopt, std::nullopt);
  }
  return cert;
}

ViabilityCertificate impulse_viability_check(const SystemSpec& system,
                                             const ImpulseControl& control,
                                             const ConstraintSet& M, double t0, double T,
                                             const CertificateOptions& opts) {
  ViabilityCertificate cert;
  cert.mode = CertificateMode::impulse;
  cert.pass = true;
  cert.slack = opts.slack;
  const auto boundary = certificate_boundary(system, M, opts);

  // density condition on a (t, boundary) grid
  for (int k = 0; k < opts.t_samples; ++k) {
    const double t = t0 + (T - t0) * static_cast<double>(k) / std::max(1, opts.t_samples - 1);
    scan_direction(
        M, boundary, opts, cert,
        [&](const Eigen::VectorXd& x) {
          Eigen::VectorXd dir = system.f(t, x);
          if (control.has_density()) dir += system.g_slow(t, x) * control.density(t);
          return dir;
        },
        t, std::nullopt, std::nullopt);
  }

  // shaped atom condition on an (atom, s, boundary) grid
  const auto& atoms = control.atoms();
  for (size_t k = 0; k < atoms.size(); ++k) {
    for (int j = 0; j < opts.s_samples; ++j) {
      const double s =
          kFastLo + (kFastHi - kFastLo) * static_cast<double>(j) / std::max(1, opts.s_samples - 1);
      scan_direction(
          M, boundary, opts, cert,
          [&](const Eigen::VectorXd& x) {
            return (system.g(atoms[k].tau, x, s) * atoms[k].shaped_magnitude(s)).eval();
          },
          std::nullopt, s, static_cast<int>(k));
    }
  }
  if (!control.has_density() && atoms.empty())
    cert.note = "no density and no atoms: reduces to the flow-only condition";
  return cert;
}

StabilityReport stability_check(const SystemSpec& system, const Eigen::VectorXd& x_star,
                                const ImpulseControl& control, const std::vector<int>& l_list,
                                double t0, double T, const CertificateOptions& opts) {
  StabilityReport report;
  report.x_star = x_star;
  report.slack = opts.slack;

  const Eigen::VectorXd f0 = system.f(t0, x_star);
  double g_residual = 0.0;
  if (system.g_fast_time) {
    for (int j = 0; j <= 4; ++j) {
      const double s = kFastLo + (kFastHi - kFastLo) * j / 4.0;
      g_residual = std::max(g_residual, system.g_fast(t0, x_star, s).cwiseAbs().maxCoeff());
    }
  } else {
    g_residual = system.g_slow(t0, x_star).cwiseAbs().maxCoeff();
  }
  if (f0.lpNorm<Eigen::Infinity>() > 1e-9 || g_residual > 1e-9)
    throw ContractError("x_star is not an equilibrium: |f| = " + std::to_string(
                            f0.lpNorm<Eigen::Infinity>()) +
                        ", |g| = " + std::to_string(g_residual));

  report.pass = true;
  const int sphere_count = system.n >= 3 ? 128 : 64;
  for (int l : l_list) {
    StabilityRadius radius;
    radius.l = l;
    radius.pass = true;
    radius.worst_inner = -1e300;
    const double r = 1.0 / l;
    for (const auto& x : sphere_points(x_star, r, sphere_count)) {
      if (!system.domain.contains_state(x)) continue;
      const Eigen::VectorXd d = x - x_star;
      // density part over the time grid
      for (int k = 0; k < opts.t_samples; ++k) {
        const double t =
            t0 + (T - t0) * static_cast<double>(k) / std::max(1, opts.t_samples - 1);
        Eigen::VectorXd dir = system.f(t, x);
        if (control.has_density()) dir += system.g_slow(t, x) * control.density(t);
        const double inner = d.dot(dir);
        if (inner > radius.worst_inner) radius.worst_inner = inner;
        if (inner > opts.slack && radius.pass) {
          radius.pass = false;
          radius.counterexample = Counterexample{x, -1, t, std::nullopt, std::nullopt, inner};
        }
      }
      // shaped atoms over the fast grid
      for (size_t k = 0; k < control.atoms().size(); ++k) {
        const auto& atom = control.atoms()[k];
        for (int j = 0; j < opts.s_samples; ++j) {
          const double s = kFastLo + (kFastHi - kFastLo) * static_cast<double>(j) /
                                         std::max(1, opts.s_samples - 1);
          const double inner = d.dot(system.g(atom.tau, x, s) * atom.shaped_magnitude(s));
          if (inner > radius.worst_inner) radius.worst_inner = inner;
          if (inner > opts.slack && radius.pass) {
            radius.pass = false;
            radius.counterexample =
                Counterexample{x, -1, std::nullopt, s, static_cast<int>(k), inner};
          }
        }
      }
    }
    report.pass = report.pass && radius.pass;
    report.radii.push_back(std::move(radius));
  }
  return report;
}

AuditResult trajectory_viability_audit(const DynamicTrajectory& trajectory,
                                       const ConstraintSet& M, double tol) {
  if (trajectory.n != M.n) throw ContractError("trajectory and constraint dimensions differ");
  AuditResult out;
  size_t jump_idx = 0;
  auto violated = [&](const Eigen::VectorXd& x, int& which) {
    for (int i = 0; i < M.count(); ++i) {
      if (M.eta(i, x) > tol) {
        which = i;
        return true;
      }
    }
    return false;
  };

  for (const auto& sample : trajectory.samples) {
    int which = 0;
    if (violated(sample.x, which)) {
      out.viable = false;
      out.exit = AuditExit{false, sample.t, 0.0, which, sample.x};
      return out;
    }
    // after the left limit of an atom, walk its fast transit
    if (sample.side == SampleSide::left && jump_idx < trajectory.jumps.size()) {
      const auto& curve = trajectory.jumps[jump_idx++];
      for (Eigen::Index j = 0; j < curve.s.size(); ++j) {
        if (violated(curve.states.col(j), which)) {
          out.viable = false;
          out.exit = AuditExit{true, curve.tau, curve.s(j), which, curve.states.col(j)};
          return out;
        }
      }
    }
  }
  return out;
}

}  // namespace ivt
