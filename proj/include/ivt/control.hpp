#ifndef IVT_CONTROL_HPP
#define IVT_CONTROL_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ivt/shape.hpp"

namespace ivt {

/// One impulse: firing time tau, jump magnitude c in R^n, and one shape per
/// component.
struct ImpulseAtom {
  ImpulseAtom(double tau, Eigen::VectorXd c, std::vector<Shape> shapes);
  /// Shared-profile convenience: every component unfolds with the same shape.
  ImpulseAtom(double tau, Eigen::VectorXd c, const Shape& shape);

  /// Componentwise product <c, alpha(s)>.
  Eigen::VectorXd shaped_magnitude(double s) const;

  int dim() const { return static_cast<int>(c.size()); }

  double tau;
  Eigen::VectorXd c;
  std::vector<Shape> shapes;
};

/// Distributional control: continuous density w plus finitely many atoms with
/// strictly increasing firing times.
class ImpulseControl {
 public:
  explicit ImpulseControl(int n);
  ImpulseControl(int n, std::function<Eigen::VectorXd(double)> w);
  ImpulseControl(int n, std::function<Eigen::VectorXd(double)> w, std::vector<ImpulseAtom> atoms);
  ImpulseControl(int n, std::vector<ImpulseAtom> atoms);

  static ImpulseControl zero(int n) { return ImpulseControl(n); }

  int dim() const { return n_; }
  bool has_density() const { return has_w_; }
  Eigen::VectorXd density(double t) const;
  const std::vector<ImpulseAtom>& atoms() const { return atoms_; }

 private:
  void check_atoms() const;

  int n_;
  bool has_w_ = false;
  std::function<Eigen::VectorXd(double)> w_;
  std::vector<ImpulseAtom> atoms_;
};

struct ControlIntegral {
  Eigen::VectorXd value;
  /// Atom times that landed exactly on a window endpoint. The open-interval
  /// window makes their membership ambiguous; they are excluded from the
  /// value and surfaced here.
  std::vector<double> boundary_atoms;
  bool boundary_warning = false;
};

/// Integral of the control over the open window (t0, T): quadrature of w
/// plus the sum of interior atom magnitudes.
ControlIntegral control_integral(const ImpulseControl& control, double t0, double T);

struct Admissibility {
  bool admissible = true;
  std::vector<std::string> violations;
};

/// Componentwise nonnegativity (w on a sampling grid, atom magnitudes,
/// shapes on their grids) and per-component budget over the window.
Admissibility check_admissible(const ImpulseControl& control, double budget, double t0, double T,
                               int grid = 257);

struct HeavisideDeltaProduct {
  double coefficient = 0.0;
  /// Absent when |coefficient| < 1e-12 (the product is undefined).
  std::optional<Shape> shape;
};

/// Product of a unit-step transit primitive beta (beta(-1/2) = 0,
/// beta(1/2) = 1) with a shaped atom: coefficient integral(beta * alpha) and
/// the renormalized shape alpha*beta / coefficient.
HeavisideDeltaProduct heaviside_delta_product(const std::function<double(double)>& beta,
                                              const Shape& alpha);

}  // namespace ivt

#endif
