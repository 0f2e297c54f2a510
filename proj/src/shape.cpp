#include "ivt/shape.hpp"

#include <cmath>
#include <utility>

#include "ivt/errors.hpp"
#include "ivt/quadrature.hpp"

namespace ivt {

Shape::Shape(std::function<double(double)> profile) : fn_(std::move(profile)) {
  if (!fn_) throw ContractError("shape profile callable is empty");
}

Shape::Shape(Eigen::VectorXd samples) : samples_(std::move(samples)) {
  if (samples_.size() < 16) throw ContractError("sampled shape needs a grid of at least 16 nodes");
}

double Shape::operator()(double s) const {
  if (!sampled()) return fn_(s);
  const auto m = samples_.size();
  const double u = (s - kFastLo) / (kFastHi - kFastLo) * static_cast<double>(m - 1);
  if (u <= 0.0) return samples_(0);
  if (u >= static_cast<double>(m - 1)) return samples_(m - 1);
  const auto j = static_cast<Eigen::Index>(u);
  const double w = u - static_cast<double>(j);
  return (1.0 - w) * samples_(j) + w * samples_(j + 1);
}

double Shape::integral() const {
  if (sampled()) return trapezoid_uniform(samples_, kFastLo, kFastHi);
  return adaptive_simpson([this](double s) { return fn_(s); }, kFastLo, kFastHi, 1e-10);
}

ShapeValidation validate_shape(const Shape& shape, double tol) {
  ShapeValidation report;
  report.tol = tol;
  const int scan = shape.sampled() ? static_cast<int>(shape.samples().size()) : 1025;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < scan; ++i) {
    const double s = kFastLo + (kFastHi - kFastLo) * static_cast<double>(i) / (scan - 1);
    const double v = shape(s);
    if (!std::isfinite(v)) {
      throw EvalError("shape profile is not finite at s = " + std::to_string(s));
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  report.min_value = lo;
  report.max_value = hi;
  report.integral = shape.integral();
  report.pass = std::abs(report.integral - 1.0) <= tol;
  return report;
}

Shape shape_flat() {
  return Shape([](double) { return 1.0; });
}

Shape shape_tent() {
  return Shape([](double s) { return 2.0 - 4.0 * std::abs(s); });
}

Shape shape_front() {
  return Shape([](double s) { return 1.0 - 2.0 * s; });
}

Shape shape_back() {
  return Shape([](double s) { return 1.0 + 2.0 * s; });
}

std::optional<Shape> shape_preset(std::string_view name) {
  if (name == "flat") return shape_flat();
  if (name == "tent") return shape_tent();
  if (name == "front") return shape_front();
  if (name == "back") return shape_back();
  return std::nullopt;
}

std::vector<std::string> shape_preset_names() { return {"flat", "tent", "front", "back"}; }

}  // namespace ivt
