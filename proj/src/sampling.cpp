#include "ivt/sampling.hpp"

#include <cmath>

#include "ivt/errors.hpp"

namespace ivt {

double halton(unsigned index, unsigned base) {
  double f = 1.0, r = 0.0;
  unsigned i = index + 1;  // skip the zero point
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

Eigen::VectorXd halton_point(unsigned index, int dim) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (dim < 1 || dim > 8) throw ContractError("halton_point supports 1..8 dimensions");
  Eigen::VectorXd p(dim);
  for (int d = 0; d < dim; ++d) p(d) = halton(index, primes[d]);
  return p;
}

Eigen::VectorXd halton_in_box(unsigned index, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi) {
  const int dim = static_cast<int>(lo.size());
  Eigen::VectorXd u = halton_point(index, dim);
  return lo.array() + u.array() * (hi - lo).array();
}

std::vector<Eigen::VectorXd> sphere_points(const Eigen::VectorXd& center, double radius,
                                           int count) {
  const int n = static_cast<int>(center.size());
  std::vector<Eigen::VectorXd> pts;
  if (n == 1) {
    pts.push_back(center.array() - radius);
    pts.push_back(center.array() + radius);
    return pts;
  }
  if (n == 2) {
    pts.reserve(count);
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / count;
      Eigen::VectorXd p(2);
      p << center(0) + radius * std::cos(a), center(1) + radius * std::sin(a);
      pts.push_back(std::move(p));
    }
    return pts;
  }
  // n >= 3: Fibonacci points on the 2-sphere lifted by Halton in the extra
  // coordinates (desk-scale certification; n > 3 is rare here).
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd dir(n);
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r2 = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * M_PI * std::fmod(i / golden, 1.0);
    dir(0) = r2 * std::cos(phi);
    dir(1) = r2 * std::sin(phi);
    dir(2) = z;
    for (int d = 3; d < n; ++d) dir(d) = 2.0 * halton(static_cast<unsigned>(i), 7) - 1.0;
    dir.normalize();
    pts.push_back(center + radius * dir);
  }
  return pts;
}

}  // namespace ivt
