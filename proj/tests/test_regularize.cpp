#include <doctest.h>

#include <cmath>

#include "ivt/errors.hpp"
#include "ivt/regularize.hpp"

#include "oracles.hpp"

using namespace ivt;
using oracle::vec1;

namespace {

SystemSpec channel_x() {
  return oracle::system1([](double, double) { return 0.0; },
                         [](double, double x) { return x; });
}

ImpulseControl unit_atom_at_zero(const Shape& shape = shape_flat()) {
  return ImpulseControl(1, {ImpulseAtom(0.0, vec1(1.0), shape)});
}

}  // namespace

TEST_CASE("mollified flat atom is a box pulse of height n") {
  const auto term = delta_sequence_term(ImpulseAtom(0.0, vec1(1.0), shape_flat()), 10);
  CHECK(term(0.0)(0) == doctest::Approx(10.0));
  CHECK(term(0.049)(0) == doctest::Approx(10.0));
  CHECK(term(0.051)(0) == 0.0);
  CHECK(term(-0.2)(0) == 0.0);
  // quadrature aligned with the support so the pulse edges are panel ends
  const double integral = oracle::gauss([&](double t) { return term(t)(0); }, -0.05, 0.05, 256);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("n = 1 reproduces the shape itself at the atom time") {
  const auto term = delta_sequence_term(ImpulseAtom(2.0, vec1(1.5), shape_tent()), 1);
  const auto tent = shape_tent();
  for (double d : {-0.49, -0.2, 0.0, 0.3, 0.49}) {
    CHECK(term(2.0 + d)(0) == doctest::Approx(1.5 * tent(d)).epsilon(1e-12));
  }
}

TEST_CASE("mollified integral carries the full magnitude for every n") {
  const ImpulseAtom atom(0.0, vec1(2.0), shape_tent());
  for (int n : {1, 10, 100, 640}) {
    CAPTURE(n);
    const auto term = delta_sequence_term(atom, n);
    const double integral = oracle::gauss([&](double t) { return term(t)(0); },
                                          -0.5 / n, 0.5 / n, 512);
    CHECK(integral == doctest::Approx(2.0).epsilon(1e-8));
  }
}

TEST_CASE("regularized solutions approach the impulsive jump value") {
  const auto sys = channel_x();
  const auto control = unit_atom_at_zero();
  double prev = 1e300;
  for (int n : {10, 80, 640}) {
    CAPTURE(n);
    const auto traj = regularized_solve(sys, control, n, -0.5, vec1(1.0), 0.5, {});
    const double err = std::abs(traj.samples.back().x(0) - std::exp(1.0));
    CHECK(err < 1e-5);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
}

TEST_CASE("density-only controls are untouched by regularization") {
  const auto sys = oracle::system1([](double t, double x) { return -x + std::sin(t); },
                                   [](double, double) { return 1.0; });
  ImpulseControl control(1, [](double t) { return vec1(0.25 + 0.1 * t); });
  const auto direct = solve_ivp(sys, control, 0.0, vec1(1.0), 1.0, {});
  for (int n : {5, 50}) {
    const auto reg = regularized_solve(sys, control, n, 0.0, vec1(1.0), 1.0, {});
    CHECK((reg.samples.back().x - direct.samples.back().x).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("overlapping mollified supports are rejected") {
  ImpulseControl control(1, {ImpulseAtom(0.0, vec1(1.0), shape_flat()),
                             ImpulseAtom(0.05, vec1(1.0), shape_flat())});
  CHECK_THROWS_AS(regularized_solve(channel_x(), control, 4, -0.5, vec1(1.0), 0.5, {}),
                  ContractError);
  // a support poking out of the horizon is the same failure
  CHECK_THROWS_AS(regularized_solve(channel_x(), unit_atom_at_zero(), 1, -0.4, vec1(1.0), 0.5, {}),
                  ContractError);
}

TEST_CASE("convergence report decreases to the impulsive solution") {
  const auto report = convergence_report(channel_x(), unit_atom_at_zero(), -0.5, vec1(1.0), 0.5,
                                         {10, 40, 160, 640}, {-0.25, 0.3, 0.45}, {});
  REQUIRE(report.sup_per_n.size() == 4);
  CHECK(report.converged);
  CHECK(report.sup_per_n.back() < 1e-3);
  CHECK(report.sup_per_n[1] <= report.sup_per_n[0]);
  CHECK(report.sup_per_n[2] <= report.sup_per_n[1]);
  CHECK(report.sup_per_n[3] <= report.sup_per_n[2]);
  CHECK(report.rows.size() == 12);
}

TEST_CASE("probing too close to an atom is rejected") {
  CHECK_THROWS_AS(convergence_report(channel_x(), unit_atom_at_zero(), -0.5, vec1(1.0), 0.5,
                                     {10, 40}, {0.04}, {}),
                  ContractError);
}

TEST_CASE("density-only control reports zero distances") {
  const auto sys = oracle::system1([](double, double x) { return -x; },
                                   [](double, double) { return 1.0; });
  ImpulseControl control(1, [](double) { return vec1(0.3); });
  const auto report =
      convergence_report(sys, control, 0.0, vec1(1.0), 1.0, {10, 40, 160}, {0.5, 0.9}, {});
  for (double sup : report.sup_per_n) CHECK(sup <= 1e-8);
}

TEST_CASE("jump recovery: the mollified transit reproduces the jump increment") {
  const auto sys = channel_x();
  const auto control = unit_atom_at_zero();
  const int n = 640;
  SolveOptions opts;
  opts.record_times = {-0.5 / n, 0.5 / n};
  const auto traj = regularized_solve(sys, control, n, -0.5, vec1(1.0), 0.5, opts);
  const double increment =
      traj.state_at(0.5 / n)(0) - traj.state_at(-0.5 / n)(0);
  const auto exact = solve_ivp(sys, control, -0.5, vec1(1.0), 0.5, {});
  const double jump = exact.jumps[0].exitpoint()(0) - exact.jumps[0].entry()(0);
  CHECK(increment == doctest::Approx(jump).epsilon(1e-4));
}

TEST_CASE("shape families split the limit when the channel does not commute") {
  const auto sys = oracle::noncommuting2d();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  auto limit_for = [&](const Shape& a1, const Shape& a2) {
    ImpulseControl control(2, {ImpulseAtom(0.0, oracle::vec2(1.0, 1.0), {a1, a2})});
    const auto traj = regularized_solve(sys, control, 320, -0.5, x0, 0.5, {});
    return traj.samples.back().x;
  };
  const Eigen::VectorXd fb = limit_for(shape_front(), shape_back());
  const Eigen::VectorXd bf = limit_for(shape_back(), shape_front());
  CHECK((fb - bf).lpNorm<Eigen::Infinity>() > 1e-3);

  // and each family's limit agrees with its own impulsive endpoint
  ImpulseControl impulse(2, {ImpulseAtom(0.0, oracle::vec2(1.0, 1.0),
                                         {shape_front(), shape_back()})});
  const auto exact = solve_ivp(sys, impulse, -0.5, x0, 0.5, {});
  CHECK((fb - exact.samples.back().x).lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("commuting channels make the limit shape-free") {
  // decoupled diagonal channel: the bracket vanishes, so every shape pair
  // drives the regularized solutions to the same limit
  SystemSpec sys;
  sys.n = 2;
  sys.f = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
  sys.g = [](double, const Eigen::VectorXd& x, std::optional<double>) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
    G(0, 0) = 1.0 + 0.5 * std::tanh(x(0));
    G(1, 1) = 2.0 - std::exp(-x(1) * x(1));
    return G;
  };
  sys.domain.x_lo = Eigen::VectorXd::Constant(2, -5);
  sys.domain.x_hi = Eigen::VectorXd::Constant(2, 5);

  const Eigen::VectorXd x0 = oracle::vec2(0.2, -0.1);
  auto limit_for = [&](const Shape& a1, const Shape& a2) {
    ImpulseControl control(2, {ImpulseAtom(0.0, oracle::vec2(0.4, 0.3), {a1, a2})});
    return regularized_solve(sys, control, 320, -0.5, x0, 0.5, {}).samples.back().x;
  };
  const Eigen::VectorXd fb = limit_for(shape_front(), shape_back());
  const Eigen::VectorXd bf = limit_for(shape_back(), shape_front());
  const Eigen::VectorXd ff = limit_for(shape_flat(), shape_flat());
  CHECK((fb - bf).lpNorm<Eigen::Infinity>() <= 1e-4);
  CHECK((fb - ff).lpNorm<Eigen::Infinity>() <= 1e-4);
}
