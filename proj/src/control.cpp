#include "ivt/control.hpp"

#include <cmath>
#include <utility>

#include "ivt/errors.hpp"
#include "ivt/quadrature.hpp"

namespace ivt {

ImpulseAtom::ImpulseAtom(double tau_, Eigen::VectorXd c_, std::vector<Shape> shapes_)
    : tau(tau_), c(std::move(c_)), shapes(std::move(shapes_)) {
  if (c.size() == 0) throw ContractError("impulse atom has empty magnitude");
  if (c.lpNorm<Eigen::Infinity>() == 0.0) throw ContractError("impulse atom magnitude is zero");
  if (static_cast<Eigen::Index>(shapes.size()) != c.size())
    throw ContractError("impulse atom needs one shape per component");
  for (const auto& shape : shapes) {
    const auto report = validate_shape(shape);
    if (!report.pass)
      throw ContractError("impulse atom shape integral " + std::to_string(report.integral) +
                          " is not 1 within tolerance");
  }
}

ImpulseAtom::ImpulseAtom(double tau_, Eigen::VectorXd c_, const Shape& shape)
    : ImpulseAtom(tau_, c_, std::vector<Shape>(static_cast<size_t>(c_.size()), shape)) {}

Eigen::VectorXd ImpulseAtom::shaped_magnitude(double s) const {
  Eigen::VectorXd out(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) out(i) = c(i) * shapes[static_cast<size_t>(i)](s);
  return out;
}

ImpulseControl::ImpulseControl(int n) : n_(n) {
  if (n_ <= 0) throw ContractError("control dimension must be positive");
}

ImpulseControl::ImpulseControl(int n, std::function<Eigen::VectorXd(double)> w)
    : n_(n), has_w_(true), w_(std::move(w)) {
  if (n_ <= 0) throw ContractError("control dimension must be positive");
}

ImpulseControl::ImpulseControl(int n, std::function<Eigen::VectorXd(double)> w,
                               std::vector<ImpulseAtom> atoms)
    : n_(n), has_w_(true), w_(std::move(w)), atoms_(std::move(atoms)) {
  if (n_ <= 0) throw ContractError("control dimension must be positive");
  check_atoms();
}

ImpulseControl::ImpulseControl(int n, std::vector<ImpulseAtom> atoms)
    : n_(n), atoms_(std::move(atoms)) {
  if (n_ <= 0) throw ContractError("control dimension must be positive");
  check_atoms();
}

void ImpulseControl::check_atoms() const {
  for (size_t k = 0; k < atoms_.size(); ++k) {
    if (atoms_[k].dim() != n_) throw ContractError("atom dimension does not match control");
    if (k > 0 && !(atoms_[k].tau > atoms_[k - 1].tau))
      throw ContractError("atom times must be strictly increasing");
  }
}

Eigen::VectorXd ImpulseControl::density(double t) const {
  if (!has_w_) return Eigen::VectorXd::Zero(n_);
  Eigen::VectorXd v = w_(t);
  if (v.size() != n_) throw ContractError("control density returned wrong dimension");
  return v;
}

ControlIntegral control_integral(const ImpulseControl& control, double t0, double T) {
  if (!(t0 < T)) throw ContractError("control_integral window is empty");
  ControlIntegral out;
  out.value = Eigen::VectorXd::Zero(control.dim());
  if (control.has_density()) {
    out.value = adaptive_simpson_vec([&control](double t) { return control.density(t); }, t0, T,
                                     1e-10);
  }
  for (const auto& atom : control.atoms()) {
    if (atom.tau == t0 || atom.tau == T) {
      out.boundary_atoms.push_back(atom.tau);
      continue;
    }
    if (atom.tau > t0 && atom.tau < T) out.value += atom.c;
  }
  out.boundary_warning = !out.boundary_atoms.empty();
  return out;
}

Admissibility check_admissible(const ImpulseControl& control, double budget, double t0, double T,
                               int grid) {
  Admissibility out;
  auto flag = [&out](std::string msg) {
    out.admissible = false;
    out.violations.push_back(std::move(msg));
  };

  if (control.has_density()) {
    for (int i = 0; i < grid; ++i) {
      const double t = t0 + (T - t0) * static_cast<double>(i) / (grid - 1);
      const Eigen::VectorXd w = control.density(t);
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) < 0.0) {
          flag("negative density component " + std::to_string(j + 1) + " at t = " +
               std::to_string(t));
          i = grid;  // one witness per run is enough
          break;
        }
      }
    }
  }
  for (size_t k = 0; k < control.atoms().size(); ++k) {
    const auto& atom = control.atoms()[k];
    for (Eigen::Index j = 0; j < atom.c.size(); ++j) {
      if (atom.c(j) < 0.0)
        flag("negative atom component " + std::to_string(j + 1) + " at tau = " +
             std::to_string(atom.tau));
    }
    for (size_t j = 0; j < atom.shapes.size(); ++j) {
      const auto rep = validate_shape(atom.shapes[j]);
      if (rep.min_value < 0.0)
        flag("shape of component " + std::to_string(j + 1) + " at tau = " +
             std::to_string(atom.tau) + " takes negative values");
    }
  }

  // boundary atoms are excluded from the open-interval integral but counted
  // against the budget here (the conservative reading)
  ControlIntegral total = control_integral(control, t0, T);
  for (const auto& atom : control.atoms()) {
    if (atom.tau == t0 || atom.tau == T) total.value += atom.c;
  }
  for (Eigen::Index j = 0; j < total.value.size(); ++j) {
    if (total.value(j) > budget + 1e-9)
      flag("budget exceeded component " + std::to_string(j + 1) + ": " +
           std::to_string(total.value(j)) + " > " + std::to_string(budget));
  }
  return out;
}

HeavisideDeltaProduct heaviside_delta_product(const std::function<double(double)>& beta,
                                              const Shape& alpha) {
  HeavisideDeltaProduct out;
  if (alpha.sampled()) {
    const auto& nodes = alpha.samples();
    Eigen::VectorXd prod(nodes.size());
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      const double s =
          kFastLo + (kFastHi - kFastLo) * static_cast<double>(i) / (nodes.size() - 1);
      prod(i) = nodes(i) * beta(s);
    }
    out.coefficient = trapezoid_uniform(prod, kFastLo, kFastHi);
  } else {
    out.coefficient =
        adaptive_simpson([&](double s) { return beta(s) * alpha(s); }, kFastLo, kFastHi, 1e-10);
  }
  if (std::abs(out.coefficient) < 1e-12) return out;  // undefined, no shape
  const double coeff = out.coefficient;
  out.shape = Shape([beta, alpha, coeff](double s) { return alpha(s) * beta(s) / coeff; });
  return out;
}

}  // namespace ivt
