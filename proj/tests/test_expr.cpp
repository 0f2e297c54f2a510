#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ivt/errors.hpp"
#include "ivt/expr.hpp"

using namespace ivt;

namespace {

Eigen::VectorXd xv(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double val : values) v(i++) = val;
  return v;
}

}  // namespace

TEST_CASE("basic parse and eval") {
  const Expr e = Expr::parse("x1 - 1", 1);
  CHECK(e.eval(0.0, xv({3.0})) == doctest::Approx(2.0));
  CHECK(e.uses_x());
  CHECK_FALSE(e.uses_t());
  CHECK_FALSE(e.uses_s());
}

TEST_CASE("the clamp-to-half factor parses") {
  const Expr e = Expr::parse("0.5 - x1", 1);
  CHECK(e.eval(0.0, xv({0.25})) == doctest::Approx(0.25));
}

TEST_CASE("out-of-range state variable is a parse error") {
  CHECK_THROWS_AS(Expr::parse("x3 + 1", 2), ParseError);
}

TEST_CASE("exp of t") {
  const Expr e = Expr::parse("exp(t)", 0);
  CHECK(e.eval(1.0, Eigen::VectorXd()) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("division by zero is a domain error") {
  const Expr e = Expr::parse("1/x1", 1);
  CHECK_THROWS_AS(e.eval(0.0, xv({0.0})), EvalError);
}

TEST_CASE("ln and sqrt domain errors") {
  CHECK_THROWS_AS(Expr::parse("ln(x1)", 1).eval(0.0, xv({-1.0})), EvalError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)", 1).eval(0.0, xv({-1.0})), EvalError);
}

TEST_CASE("fast-time variable outside a jump context") {
  const Expr e = Expr::parse("1 + s", 1);
  CHECK(e.uses_s());
  CHECK(e.eval(0.0, xv({0.0}), 0.25) == doctest::Approx(1.25));
  CHECK_THROWS_AS(e.eval(0.0, xv({0.0})), ContractError);
}

TEST_CASE("precedence and associativity") {
  const Eigen::VectorXd none;
  CHECK(Expr::parse("2 + 3 * 4", 0).eval(0, none) == doctest::Approx(14.0));
  CHECK(Expr::parse("2 ^ 3 ^ 2", 0).eval(0, none) == doctest::Approx(512.0));  // right assoc
  CHECK(Expr::parse("-2 ^ 2", 0).eval(0, none) == doctest::Approx(-4.0));
  CHECK(Expr::parse("2 ^ -1", 0).eval(0, none) == doctest::Approx(0.5));
  CHECK(Expr::parse("6 / 2 / 3", 0).eval(0, none) == doctest::Approx(1.0));
  CHECK(Expr::parse("min(3, max(1, 2))", 0).eval(0, none) == doctest::Approx(2.0));
}

TEST_CASE("syntax errors carry positions") {
  try {
    Expr::parse("1 + * 2", 0);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.pos.line == 1);
    CHECK(e.pos.col == 5);
  }
  CHECK_THROWS_AS(Expr::parse("sin(1, 2)", 0), ParseError);
  CHECK_THROWS_AS(Expr::parse("min(1)", 0), ParseError);
  CHECK_THROWS_AS(Expr::parse("(1 + 2", 0), ParseError);
  CHECK_THROWS_AS(Expr::parse("", 0), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(1)", 0), ParseError);
}

TEST_CASE("gradient of the interval constraint") {
  // closed form: d/dx (x - 1/2)^2 - 1/4 = 2(x - 1/2) = 1 at x = 1
  const Expr e = Expr::parse("(x1 - 0.5)^2 - 0.25", 1);
  const Eigen::VectorXd g = e.grad(0.0, xv({1.0}));
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gradient of the square constraint at -1") {
  const Expr e = Expr::parse("x1^2 - 1", 1);
  CHECK(e.grad(0.0, xv({-1.0}))(0) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("gradient of a linear form is exact") {
  const Expr e = Expr::parse("x1 + x2", 2);
  const Eigen::VectorXd g = e.grad(0.0, xv({0.0, 0.0}));
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g(1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gradient of a quadratic matches the analytic one to 10 h^2") {
  const Expr e = Expr::parse("3*x1^2 - 2*x1*x2 + x2^2", 2);
  const double h = 1e-6;
  const Eigen::VectorXd g = e.grad(0.0, xv({1.25, -0.75}), h);
  const double gx = 6 * 1.25 - 2 * (-0.75);
  const double gy = -2 * 1.25 + 2 * (-0.75);
  CHECK(std::abs(g(0) - gx) <= 10 * h * h + 1e-9);
  CHECK(std::abs(g(1) - gy) <= 10 * h * h + 1e-9);
}

TEST_CASE("reparsing the canonical print reproduces the structure") {
  const std::vector<std::string> sources = {
      "x1 - 1",
      "0.5 - x1",
      "-x1^2 + 3*(t - 2)/4",
      "min(x1, max(x2, 0.5)) * exp(-t)",
      "2 - 4*abs(s)",
      "sqrt(x1^2 + x2^2) - ln(t + 3)",
      "-(-x1)",
      "1/(1 + exp(-x1))",
  };
  for (const auto& src : sources) {
    CAPTURE(src);
    const Expr first = Expr::parse(src, 2);
    const Expr second = Expr::parse(first.print(), 2);
    CHECK(first.same_structure(second));
    CHECK(second.same_structure(Expr::parse(second.print(), 2)));
  }
}

TEST_CASE("evaluation is bit-deterministic") {
  const Expr e = Expr::parse("sin(x1) * exp(x2) / (1 + x1^2)", 2);
  const Eigen::VectorXd x = xv({0.7, -1.3});
  const double first = e.eval(2.5, x);
  for (int i = 0; i < 10; ++i) CHECK(e.eval(2.5, x) == first);
}
