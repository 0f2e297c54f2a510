#ifndef IVT_SAMPLING_HPP
#define IVT_SAMPLING_HPP

#include <vector>

#include <Eigen/Core>

namespace ivt {

/// Radical-inverse (van der Corput) value of index i in the given base.
double halton(unsigned index, unsigned base);

/// Quasi-random point in the unit cube of the given dimension (Halton bases
/// 2, 3, 5, ...; supports dim <= 8).
Eigen::VectorXd halton_point(unsigned index, int dim);

/// Quasi-random point mapped into the box [lo, hi] componentwise.
Eigen::VectorXd halton_in_box(unsigned index, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// Deterministic samples of the Euclidean sphere |x - center|_2 = radius.
/// n = 1 gives the two endpoints; n = 2 a uniform angle sweep; n >= 3 a
/// Fibonacci-style covering.
std::vector<Eigen::VectorXd> sphere_points(const Eigen::VectorXd& center, double radius,
                                           int count);

}  // namespace ivt

#endif
