#ifndef IVT_FROBENIUS_HPP
#define IVT_FROBENIUS_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ivt/shape.hpp"
#include "ivt/system.hpp"

namespace ivt {

/// Central-difference Jacobian of column m of g at (t, x); s selects a fast
/// value for fast-time-dependent g.
Eigen::MatrixXd column_jacobian(const SystemSpec& system, int m, double t,
                                const Eigen::VectorXd& x, double h = 1e-6,
                                std::optional<double> s = std::nullopt);

/// Lie bracket of columns m and l of g:
///   [g^m, g^l]_x = (dg^l/dx) g^m - (dg^m/dx) g^l.
Eigen::VectorXd lie_bracket(const SystemSpec& system, int m, int l, double t,
                            const Eigen::VectorXd& x, double h = 1e-6,
                            std::optional<double> s = std::nullopt);

struct FrobeniusReport {
  bool pass = false;
  double tol = 0.0;
  double max_norm = 0.0;
  double t_at = 0.0;
  Eigen::VectorXd x_at;
  std::optional<double> s_at;
  int samples = 0;
};

/// Samples the domain box at quasi-random points (and an s-grid when g
/// depends on fast time) and reports the worst bracket norm over all column
/// pairs. Pass iff max |bracket| <= tol.
FrobeniusReport frobenius_check(const SystemSpec& system, int samples = 200, double tol = 1e-5,
                                double h = 1e-6);

/// Max pairwise distance between jump endpoints across a shape family with
/// fixed magnitude c; the empirical counterpart of bracket-flatness. The
/// family lists one shared profile per member.
double shape_sensitivity(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                         const Eigen::VectorXd& c, const std::vector<Shape>& family,
                         int steps = 256);

/// Tuple-family variant with one profile per component per member. Needed to
/// expose non-flat brackets: with a single shared profile some non-commuting
/// channels still produce shape-free endpoints.
double shape_sensitivity(const SystemSpec& system, double tau, const Eigen::VectorXd& x_minus,
                         const Eigen::VectorXd& c,
                         const std::vector<std::vector<Shape>>& family, int steps = 256);

}  // namespace ivt

#endif
