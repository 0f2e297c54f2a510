#ifndef IVT_EXPR_HPP
#define IVT_EXPR_HPP

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ivt/errors.hpp"

namespace ivt {

namespace detail {
struct ExprNode;
}

/// Parsed scalar expression over t, s, x1..xn with +, -, *, /, ^ (right
/// associative), unary minus, and sin, cos, exp, ln, abs, sqrt, min, max.
/// Immutable and shareable; evaluation is pure.
class Expr {
 public:
  Expr() = default;

  /// Parses source under the given state dimension. Variable references
  /// beyond xn are parse errors. Throws ParseError with line/column.
  static Expr parse(std::string_view source, int n);

  bool valid() const { return root_ != nullptr; }
  int dim() const { return n_; }
  bool uses_t() const { return uses_t_; }
  bool uses_s() const { return uses_s_; }
  bool uses_x() const { return uses_x_; }

  /// Evaluation outside a jump (no fast-time variable). Throws EvalError on
  /// domain errors, ContractError if the expression references s.
  double eval(double t, const Eigen::VectorXd& x) const;
  /// Evaluation inside a jump with fast time s.
  double eval(double t, const Eigen::VectorXd& x, double s) const;

  /// Central-difference gradient in x with step h, t held fixed.
  Eigen::VectorXd grad(double t, const Eigen::VectorXd& x, double h = 1e-6) const;

  /// Canonical fully parenthesized rendering; reparsing it reproduces the
  /// tree structure.
  std::string print() const;

  bool same_structure(const Expr& other) const;

 private:
  std::shared_ptr<const detail::ExprNode> root_;
  int n_ = 0;
  bool uses_t_ = false;
  bool uses_s_ = false;
  bool uses_x_ = false;
};

}  // namespace ivt

#endif
