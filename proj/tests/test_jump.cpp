#include <doctest.h>

#include <cmath>

#include "ivt/errors.hpp"
#include "ivt/jump.hpp"

#include "oracles.hpp"

using namespace ivt;
using oracle::vec1;
using oracle::vec2;

TEST_CASE("state-proportional channel: transit is the exponential of the primitive") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return x; });
  struct Row {
    const char* name;
    Shape shape;
    double (*primitive)(double);
  };
  const Row rows[] = {{"flat", shape_flat(), oracle::primitive_flat},
                      {"tent", shape_tent(), oracle::primitive_tent},
                      {"front", shape_front(), oracle::primitive_front},
                      {"back", shape_back(), oracle::primitive_back}};
  for (double x0 : {1.0, 2.0, -0.5}) {
    for (const auto& row : rows) {
      CAPTURE(x0);
      CAPTURE(row.name);
      const ImpulseAtom atom(0.0, vec1(1.0), row.shape);
      const FastCurve curve = solve_limit_system(sys, 0.0, vec1(x0), atom, 512);
      for (Eigen::Index j = 0; j < curve.s.size(); j += 16) {
        const double expected = x0 * std::exp(row.primitive(curve.s(j)));
        CHECK(curve.states(0, j) == doctest::Approx(expected).epsilon(1e-9));
      }
      CHECK(jump_endpoint(sys, 0.0, vec1(x0), atom)(0) ==
            doctest::Approx(x0 * std::exp(1.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("constant drain: the transit is an affine ramp") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double) { return -1.0; });
  const ImpulseAtom atom(0.0, vec1(0.5), shape_flat());
  const FastCurve curve = solve_limit_system(sys, 0.0, vec1(1.0), atom, 256);
  for (Eigen::Index j = 0; j < curve.s.size(); j += 8) {
    CHECK(curve.states(0, j) ==
          doctest::Approx(1.0 - 0.5 * (curve.s(j) + 0.5)).epsilon(1e-12));
  }
  CHECK(curve.exitpoint()(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero channel leaves the state in place") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double) { return 0.0; });
  const ImpulseAtom atom(0.0, vec1(1.0), shape_tent());
  const FastCurve curve = solve_limit_system(sys, 0.0, vec1(2.5), atom, 128);
  CHECK((curve.states.colwise() - vec1(2.5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant matrix channel: endpoint is x + G c for every shape") {
  SystemSpec sys;
  sys.n = 2;
  sys.f = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
  Eigen::MatrixXd G(2, 2);
  G << 2.0, -1.0, 0.5, 3.0;
  sys.g = [G](double, const Eigen::VectorXd&, std::optional<double>) { return G; };
  sys.domain.x_lo = Eigen::VectorXd::Constant(2, -100);
  sys.domain.x_hi = Eigen::VectorXd::Constant(2, 100);

  const Eigen::VectorXd x0 = vec2(1.0, -2.0);
  const Eigen::VectorXd c = vec2(0.5, 0.25);
  const Eigen::VectorXd expected = x0 + G * c;
  for (const Shape& shape : {shape_flat(), shape_tent(), shape_front(), shape_back()}) {
    const Eigen::VectorXd end = jump_endpoint(sys, 0.0, x0, ImpulseAtom(0.0, c, shape));
    CHECK((end - expected).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("non-commuting columns: endpoints depend on the shape ordering") {
  const auto sys = oracle::noncommuting2d();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd c = vec2(1.0, 1.0);

  // test-side oracle: gamma_1(s) = A_1(s), gamma_2(1/2) = int A_1 alpha_2
  auto endpoint = [&](double (*A1)(double), const Shape& alpha2) {
    return oracle::gauss([&](double s) { return A1(s) * alpha2(s); }, kFastLo, kFastHi);
  };
  const double front_back = endpoint(oracle::primitive_front, shape_back());
  const double back_front = endpoint(oracle::primitive_back, shape_front());
  CHECK(std::abs(front_back - back_front) > 1e-3);  // the channel order matters

  const ImpulseAtom fb(0.0, c, {shape_front(), shape_back()});
  const ImpulseAtom bf(0.0, c, {shape_back(), shape_front()});
  const Eigen::VectorXd end_fb = jump_endpoint(sys, 0.0, x0, fb);
  const Eigen::VectorXd end_bf = jump_endpoint(sys, 0.0, x0, bf);
  CHECK(end_fb(1) == doctest::Approx(front_back).epsilon(1e-8));
  CHECK(end_bf(1) == doctest::Approx(back_front).epsilon(1e-8));
  CHECK((end_fb - end_bf).lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("fast-time dependent channel") {
  SystemSpec sys;
  sys.n = 1;
  sys.f = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
  sys.g = [](double, const Eigen::VectorXd&, std::optional<double> s) {
    REQUIRE(s.has_value());
    return Eigen::MatrixXd::Constant(1, 1, *s + 1.0);
  };
  sys.g_fast_time = true;
  sys.domain.x_lo = vec1(-100);
  sys.domain.x_hi = vec1(100);

  // closed form: gamma(s) = x0 + int (u+1) du = x0 + s^2/2 + s + 3/8
  const FastCurve curve =
      solve_limit_system(sys, 0.0, vec1(2.0), ImpulseAtom(0.0, vec1(1.0), shape_flat()), 256);
  for (Eigen::Index j = 0; j < curve.s.size(); j += 32) {
    const double s = curve.s(j);
    CHECK(curve.states(0, j) ==
          doctest::Approx(2.0 + 0.5 * s * s + s + 3.0 / 8.0).epsilon(1e-10));
  }
  CHECK(curve.exitpoint()(0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("classical limit system is recovered for flat shapes") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return std::sin(x) + 1.5; });
  const Eigen::VectorXd c = vec1(0.8);
  const FastCurve curve =
      solve_limit_system(sys, 0.0, vec1(0.3), ImpulseAtom(0.0, c, shape_flat()), 512);
  const Eigen::VectorXd expected = oracle::rk4(
      [&](double, const Eigen::VectorXd& y) {
        return (sys.g_slow(0.0, y) * c).eval();
      },
      kFastLo, vec1(0.3), kFastHi);
  CHECK((curve.exitpoint() - expected).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("fast solver converges at fourth order") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return x; });
  const ImpulseAtom atom(0.0, vec1(1.0), shape_back());
  const double exact = std::exp(1.0);
  double prev_err = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const int steps = 64 << pass;
    const double err =
        std::abs(solve_limit_system(sys, 0.0, vec1(1.0), atom, steps).exitpoint()(0) - exact);
    if (pass > 0) {
      const double ratio = prev_err / err;
      CHECK(ratio > 8.0);
      CHECK(ratio < 40.0);
    }
    prev_err = err;
  }
}

TEST_CASE("transit escaping the domain box reports the exit location") {
  auto sys = oracle::system1([](double, double) { return 0.0; },
                             [](double, double x) { return x; },
                             oracle::box1(-10, 10, -2.0, 2.0));
  const ImpulseAtom atom(0.0, vec1(1.0), shape_flat());
  try {
    solve_limit_system(sys, 0.0, vec1(1.0), atom, 256);
    FAIL("expected the transit to escape");
  } catch (const JumpEscapeError& e) {
    // gamma(s) = e^{s+1/2} crosses 2 at s = ln 2 - 1/2
    CHECK(e.s == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-2));
    CHECK(e.state(0) >= 2.0);
  }
}

TEST_CASE("endpoint refuses to report an unconverged jump") {
  auto sys = oracle::system1([](double, double) { return 0.0; },
                             [](double, double x) { return x; },
                             oracle::box1(-10, 10, -1e300, 1e300));
  const ImpulseAtom atom(0.0, vec1(40.0), shape_flat());
  CHECK_THROWS_AS(jump_endpoint(sys, 0.0, vec1(1.0), atom, 64), ConvergenceError);
}

TEST_CASE("fast solver rejects coarse grids") {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return x; });
  CHECK_THROWS_AS(
      solve_limit_system(sys, 0.0, vec1(1.0), ImpulseAtom(0.0, vec1(1.0), shape_flat()), 32),
      ContractError);
}
