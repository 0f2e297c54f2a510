#include "ivt/frobenius.hpp"

#include <cmath>

#include "ivt/errors.hpp"
#include "ivt/jump.hpp"
#include "ivt/sampling.hpp"

namespace ivt {

Eigen::MatrixXd column_jacobian(const SystemSpec& system, int m, double t,
                                const Eigen::VectorXd& x, double h, std::optional<double> s) {
  if (m < 0 || m >= system.n) throw ContractError("column index out of range");
  Eigen::MatrixXd J(system.n, system.n);
  Eigen::VectorXd probe = x;
  for (int j = 0; j < system.n; ++j) {
    probe(j) = x(j) + h;
    const Eigen::VectorXd gp = system.g(t, probe, s).col(m);
    probe(j) = x(j) - h;
    const Eigen::VectorXd gm = system.g(t, probe, s).col(m);
    probe(j) = x(j);
    J.col(j) = (gp - gm) / (2.0 * h);
  }
  return J;
}

Eigen::VectorXd lie_bracket(const SystemSpec& system, int m, int l, double t,
                            const Eigen::VectorXd& x, double h, std::optional<double> s) {
  const Eigen::MatrixXd G = system.g(t, x, s);
  const Eigen::MatrixXd Jm = column_jacobian(system, m, t, x, h, s);
  const Eigen::MatrixXd Jl = column_jacobian(system, l, t, x, h, s);
  return Jl * G.col(m) - Jm * G.col(l);
}

FrobeniusReport frobenius_check(const SystemSpec& system, int samples, double tol, double h) {
  if (samples < 100) throw ContractError("frobenius_check needs at least 100 samples");
  FrobeniusReport report;
  report.tol = tol;
  report.samples = samples;
  report.x_at = Eigen::VectorXd::Zero(system.n);

  const auto& box = system.domain;
  Eigen::VectorXd lo(system.n + 1), hi(system.n + 1);
  lo(0) = std::max(box.t_lo, -1e6);
  hi(0) = std::min(box.t_hi, 1e6);
  for (int i = 0; i < system.n; ++i) {
    lo(i + 1) = box.x_lo.size() ? box.x_lo(i) + 2 * h : -1.0;
    hi(i + 1) = box.x_lo.size() ? box.x_hi(i) - 2 * h : 1.0;
  }

  std::vector<std::optional<double>> s_values = {std::nullopt};
  if (system.g_fast_time) {
    s_values.clear();
    for (int i = 0; i < 9; ++i)
      s_values.push_back(kFastLo + (kFastHi - kFastLo) * static_cast<double>(i) / 8);
  }

  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd p = halton_in_box(static_cast<unsigned>(i), lo, hi);
    const double t = p(0);
    const Eigen::VectorXd x = p.tail(system.n);
    for (const auto& s : s_values) {
      for (int m = 0; m < system.n; ++m) {
        for (int l = m + 1; l < system.n; ++l) {
          const double norm = lie_bracket(system, m, l, t, x, h, s).lpNorm<Eigen::Infinity>();
          if (norm > report.max_norm) {
            report.max_norm = norm;
            report.t_at = t;
            report.x_at = x;
            report.s_at = s;
          }
        }
      }
    }
  }
  report.pass = report.max_norm <= tol;
  return report;
}

namespace {

double endpoint_spread(const std::vector<Eigen::VectorXd>& endpoints) {
  double worst = 0.0;
  for (size_t i = 0; i < endpoints.size(); ++i) {
    for (size_t j = i + 1; j < endpoints.size(); ++j) {
      worst = std::max(worst, (endpoints[i] - endpoints[j]).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

}  // namespace

double shape_sensitivity(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                         const Eigen::VectorXd& c, const std::vector<Shape>& family, int steps) {
  if (family.size() < 2) throw ContractError("shape_sensitivity needs at least two shapes");
  std::vector<Eigen::VectorXd> endpoints;
  endpoints.reserve(family.size());
  for (const auto& shape : family) {
    const ImpulseAtom atom(tau, c, shape);
    endpoints.push_back(jump_endpoint(system, tau, x_minus, atom, steps));
  }
  return endpoint_spread(endpoints);
}

double shape_sensitivity(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                         const Eigen::VectorXd& c, const std::vector<std::vector<Shape>>& family,
                         int steps) {
  if (family.size() < 2) throw ContractError("shape_sensitivity needs at least two shapes");
  std::vector<Eigen::VectorXd> endpoints;
  endpoints.reserve(family.size());
  for (const auto& shapes : family) {
    const ImpulseAtom atom(tau, c, shapes);
    endpoints.push_back(jump_endpoint(system, tau, x_minus, atom, steps));
  }
  return endpoint_spread(endpoints);
}

}  // namespace ivt
