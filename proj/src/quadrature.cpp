#include "ivt/quadrature.hpp"

#include <cmath>

#include "ivt/errors.hpp"

namespace ivt {

double trapezoid_uniform(const Eigen::VectorXd& values, double a, double b) {
  const auto m = values.size();
  if (m < 2) throw ContractError("trapezoid needs at least two samples");
  const double h = (b - a) / static_cast<double>(m - 1);
  double acc = 0.5 * (values(0) + values(m - 1));
  for (Eigen::Index i = 1; i + 1 < m; ++i) acc += values(i);
  return acc * h;
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(fa, fm, fb, a, b);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

Eigen::VectorXd adaptive_simpson_vec(const std::function<Eigen::VectorXd(double)>& f, double a,
                                     double b, double tol, int max_depth) {
  const Eigen::VectorXd probe = f(0.5 * (a + b));
  Eigen::VectorXd out(probe.size());
  for (Eigen::Index i = 0; i < probe.size(); ++i) {
    out(i) = adaptive_simpson([&f, i](double t) { return f(t)(i); }, a, b, tol, max_depth);
  }
  return out;
}

}  // namespace ivt
