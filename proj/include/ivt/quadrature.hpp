#ifndef IVT_QUADRATURE_HPP
#define IVT_QUADRATURE_HPP

#include <functional>

#include <Eigen/Core>

namespace ivt {

/// Composite trapezoid over samples on a uniform grid spanning [a, b].
double trapezoid_uniform(const Eigen::VectorXd& values, double a, double b);

/// Adaptive Simpson quadrature of a scalar integrand.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

/// Adaptive Simpson on a vector integrand; refinement is driven by the worst
/// component.
Eigen::VectorXd adaptive_simpson_vec(const std::function<Eigen::VectorXd(double)>& f, double a,
                                     double b, double tol = 1e-10, int max_depth = 40);

}  // namespace ivt

#endif
