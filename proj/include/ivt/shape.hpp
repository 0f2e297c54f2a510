#ifndef IVT_SHAPE_HPP
#define IVT_SHAPE_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ivt {

/// The fast interval J = [-1/2, 1/2] on which impulse transits unfold.
inline constexpr double kFastLo = -0.5;
inline constexpr double kFastHi = 0.5;

/// Normalized profile on J describing how an impulse atom unfolds in fast
/// time. Backed either by a callable (closed form) or by a uniform sample
/// grid over J (>= 16 nodes, endpoints included, linear interpolation).
class Shape {
 public:
  /// Closed-form profile.
  explicit Shape(std::function<double(double)> profile);
  /// Sampled profile on a uniform grid over J including both endpoints.
  explicit Shape(Eigen::VectorXd samples);

  /// Profile value at s in J.
  double operator()(double s) const;

  /// Integral over J: composite trapezoid at the native grid for sampled
  /// shapes, adaptive Simpson (tol 1e-10) for closed forms.
  double integral() const;

  bool sampled() const { return samples_.size() > 0; }
  const Eigen::VectorXd& samples() const { return samples_; }

 private:
  std::function<double(double)> fn_;
  Eigen::VectorXd samples_;
};

struct ShapeValidation {
  double integral = 0.0;
  bool pass = false;
  double min_value = 0.0;
  double max_value = 0.0;
  double tol = 0.0;
};

/// Checks the unit-integral invariant and scans the profile range. Throws
/// EvalError naming the offending s if the profile is non-finite anywhere
/// on the scan grid.
ShapeValidation validate_shape(const Shape& shape, double tol = 1e-8);

/// Built-in profiles.
Shape shape_flat();   // 1
Shape shape_tent();   // 2 - 4|s|
Shape shape_front();  // 1 - 2s  (mass near s = -1/2)
Shape shape_back();   // 1 + 2s  (mass near s = +1/2)

std::optional<Shape> shape_preset(std::string_view name);
std::vector<std::string> shape_preset_names();

}  // namespace ivt

#endif
