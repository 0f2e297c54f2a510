#include "ivt/system.hpp"

#include <cmath>

#include "ivt/errors.hpp"
#include "ivt/sampling.hpp"

namespace ivt {

bool DomainBox::contains(double t, const Eigen::VectorXd& x) const {
  return t > t_lo && t < t_hi && contains_state(x);
}

bool DomainBox::contains_state(const Eigen::VectorXd& x) const {
  if (x_lo.size() == 0) return true;
  return (x.array() > x_lo.array()).all() && (x.array() < x_hi.array()).all();
}

double DomainBox::state_margin(const Eigen::VectorXd& x) const {
  if (x_lo.size() == 0) return 1e300;
  double m = 1e300;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m = std::min(m, std::min(x(i) - x_lo(i), x_hi(i) - x(i)));
  }
  return m;
}

std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&, std::optional<double>)>
slow_matrix_field(std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> g) {
  return [g = std::move(g)](double t, const Eigen::VectorXd& x, std::optional<double>) {
    return g(t, x);
  };
}

SystemValidation validate_system(const SystemSpec& system, int samples) {
  SystemValidation out;
  if (system.n <= 0 || !system.f || !system.g) throw ContractError("system spec is incomplete");
  const auto& box = system.domain;
  Eigen::VectorXd lo(system.n + 1), hi(system.n + 1);
  lo(0) = std::max(box.t_lo, -1e6);
  hi(0) = std::min(box.t_hi, 1e6);
  for (int i = 0; i < system.n; ++i) {
    lo(i + 1) = box.x_lo.size() ? std::max(box.x_lo(i), -1e6) : -1.0;
    hi(i + 1) = box.x_lo.size() ? std::min(box.x_hi(i), 1e6) : 1.0;
  }

  auto eval_at = [&](unsigned idx, double& t, Eigen::VectorXd& x) {
    const Eigen::VectorXd p = halton_in_box(idx, lo, hi);
    t = p(0);
    x = p.tail(system.n);
  };

  double prev_t = 0.0;
  Eigen::VectorXd prev_x;
  Eigen::VectorXd prev_f;
  Eigen::MatrixXd prev_g;
  for (int i = 0; i < samples; ++i) {
    double t;
    Eigen::VectorXd x;
    eval_at(static_cast<unsigned>(i), t, x);
    Eigen::VectorXd fv;
    Eigen::MatrixXd gv;
    try {
      fv = system.f(t, x);
      gv = system.g_fast_time ? system.g_fast(t, x, 0.0) : system.g_slow(t, x);
    } catch (const Error& e) {
      out.finite_ok = false;
      out.issues.push_back(std::string("evaluation failed on a domain sample: ") + e.what());
      break;
    }
    if (!fv.allFinite() || !gv.allFinite()) {
      out.finite_ok = false;
      out.issues.push_back("non-finite field value at t = " + std::to_string(t));
      break;
    }
    if (i > 0) {
      const double dx = (x - prev_x).lpNorm<Eigen::Infinity>();
      if (dx > 1e-12 && std::abs(t - prev_t) < 1e-12) {
        // same-t pair: a clean difference quotient in x
        out.max_f_slope = std::max(out.max_f_slope,
                                   (fv - prev_f).lpNorm<Eigen::Infinity>() / dx);
        out.max_g_slope =
            std::max(out.max_g_slope, (gv - prev_g).cwiseAbs().maxCoeff() / dx);
      }
    }
    // pair every sample with a same-t companion for the slope probe
    if (system.lipschitz.f || system.lipschitz.g) {
      Eigen::VectorXd x2 = halton_in_box(static_cast<unsigned>(i + samples), lo, hi).tail(system.n);
      const double dx = (x2 - x).lpNorm<Eigen::Infinity>();
      if (dx > 1e-9) {
        try {
          const Eigen::VectorXd f2 = system.f(t, x2);
          const Eigen::MatrixXd g2 =
              system.g_fast_time ? system.g_fast(t, x2, 0.0) : system.g_slow(t, x2);
          out.max_f_slope =
              std::max(out.max_f_slope, (f2 - fv).lpNorm<Eigen::Infinity>() / dx);
          out.max_g_slope = std::max(out.max_g_slope, (g2 - gv).cwiseAbs().maxCoeff() / dx);
        } catch (const Error&) {
          // companion landed on a singularity; the finite sweep above governs
        }
      }
    }
    prev_t = t;
    prev_x = x;
    prev_f = fv;
    prev_g = gv;
  }

  if (system.lipschitz.f && out.max_f_slope > 10.0 * *system.lipschitz.f) {
    out.lipschitz_ok = false;
    out.issues.push_back("empirical f slope " + std::to_string(out.max_f_slope) +
                         " exceeds 10x hint " + std::to_string(*system.lipschitz.f));
  }
  if (system.lipschitz.g && out.max_g_slope > 10.0 * *system.lipschitz.g) {
    out.lipschitz_ok = false;
    out.issues.push_back("empirical g slope " + std::to_string(out.max_g_slope) +
                         " exceeds 10x hint " + std::to_string(*system.lipschitz.g));
  }
  return out;
}

}  // namespace ivt
