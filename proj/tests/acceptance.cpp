// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ivt/avoidance.hpp"
#include "ivt/frobenius.hpp"
#include "ivt/jump.hpp"
#include "ivt/quadrature.hpp"
#include "ivt/regularize.hpp"
#include "ivt/scenario.hpp"
#include "ivt/solve.hpp"
#include "ivt/viability.hpp"

#include "oracles.hpp"

using namespace ivt;
using oracle::vec1;
using oracle::vec2;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure(detail);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void exponential_jump_endpoints() {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return x; });
  struct Row {
    Shape shape;
    double (*primitive)(double);
  };
  const Row rows[] = {{shape_flat(), oracle::primitive_flat},
                      {shape_tent(), oracle::primitive_tent},
                      {shape_front(), oracle::primitive_front},
                      {shape_back(), oracle::primitive_back}};
  for (double x0 : {1.0, 2.0, -0.5}) {
    for (const auto& row : rows) {
      const ImpulseAtom atom(0.0, vec1(1.0), row.shape);
      const double end = jump_endpoint(sys, 0.0, vec1(x0), atom, 256)(0);
      require(std::abs(end - x0 * std::exp(1.0)) <= 1e-8,
              "endpoint " + fmt(end) + " != " + fmt(x0 * std::exp(1.0)) + " within 1e-8");
      const FastCurve curve = solve_limit_system(sys, 0.0, vec1(x0), atom, 512);
      for (Eigen::Index j = 0; j < curve.s.size(); ++j) {
        const double expected = x0 * std::exp(row.primitive(curve.s(j)));
        require(std::abs(curve.states(0, j) - expected) <= 1e-7,
                "transit off the closed form at s = " + fmt(curve.s(j)));
      }
    }
  }
}

// ---------------------------------------------------------------- criterion 2
void avoidance_example() {
  const auto sys = oracle::system1([](double, double x) { return x; },
                                   [](double, double) { return -1.0; },
                                   oracle::box1(-1.0, 5.0, -10.0, 10.0));
  const auto M = ConstraintSet::build(
      1, {[](const Eigen::VectorXd& x) { return x(0) * x(0) - 1.0; }},
      {[](const Eigen::VectorXd& x) { return vec1(2.0 * x(0)).eval(); }});
  const double ln2 = std::log(2.0);

  ImpulseControl half(1, {ImpulseAtom(0.0, vec1(0.5), shape_flat())});
  const auto vt = viability_time(sys, half, 0.0, vec1(1.0), M, 2.0);
  require(std::abs(vt.T - ln2) <= 1e-4, "viability time " + fmt(vt.T) + " != ln 2 within 1e-4");

  std::vector<double> tau_grid;
  for (int i = 0; i <= 5; ++i) tau_grid.push_back(0.1 * i);
  std::vector<Eigen::VectorXd> c_grid;
  for (int i = 1; i <= 5; ++i) c_grid.push_back(vec1(0.1 * i));
  const auto search =
      search_single_atom(sys, 0.0, vec1(1.0), M, 0.5, tau_grid, c_grid, shape_flat(), 2.0);
  require(std::abs(search.best.T - ln2) <= 1e-3,
          "search best T " + fmt(search.best.T) + " != ln 2 within 1e-3");
  require(search.best.tau == 0.0 && std::abs(search.best.c(0) - 0.5) <= 1e-12,
          "search best is not (tau = 0, c = 1/2)");

  const auto regular = search_regular_controls(sys, 0.0, vec1(1.0), M, 0.5, 4, 4, 1.0, 2.0);
  require(search.best.T - regular.best.T >= 1e-3,
          "impulse gap " + fmt(search.best.T - regular.best.T) + " below 1e-3");
}

// ---------------------------------------------------------------- criterion 3
void interval_viability_certificate() {
  const auto sys = oracle::system1([](double, double x) { return -x; },
                                   [](double, double x) { return 0.5 - x; },
                                   oracle::box1(-1.0, 10.0, -1.0, 2.0));
  const auto M = ConstraintSet::build(
      1, {[](const Eigen::VectorXd& x) { return (x(0) - 0.5) * (x(0) - 0.5) - 0.25; }},
      {[](const Eigen::VectorXd& x) { return vec1(2.0 * (x(0) - 0.5)).eval(); }});
  auto atoms_with = [](const Shape& shape) {
    return ImpulseControl(1, {ImpulseAtom(0.5, vec1(1.0), shape),
                              ImpulseAtom(1.5, vec1(1.0), shape),
                              ImpulseAtom(2.5, vec1(1.0), shape),
                              ImpulseAtom(3.5, vec1(1.0), shape)});
  };
  const auto cert = impulse_viability_check(sys, atoms_with(shape_flat()), M, 0.0, 4.0);
  require(cert.pass, "impulse viability certificate failed");

  std::mt19937 rng(20260811);
  std::uniform_real_distribution<double> start(0.0, 1.0);
  std::uniform_real_distribution<double> level(0.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd nodes(33);
    for (Eigen::Index j = 0; j < nodes.size(); ++j) nodes(j) = level(rng);
    nodes /= trapezoid_uniform(nodes, kFastLo, kFastHi);
    const auto traj = solve_ivp(sys, atoms_with(Shape(nodes)), 0.0, vec1(start(rng)), 4.0, {});
    const auto audit = trajectory_viability_audit(traj, M, 1e-6);
    require(audit.viable, "randomized simulation " + std::to_string(i) + " left the set");
  }
}

// ---------------------------------------------------------------- criterion 4
void interval_stability_certificate() {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return 0.5 - x; },
                                   oracle::box1(-1.0, 10.0, -1.0, 2.0));
  ImpulseControl control(1, {ImpulseAtom(0.5, vec1(1.0), shape_flat()),
                             ImpulseAtom(1.5, vec1(1.0), shape_flat()),
                             ImpulseAtom(2.5, vec1(1.0), shape_flat())});
  const std::vector<int> l_list = {1, 2, 3, 4, 5, 6};
  const auto report = stability_check(sys, vec1(0.5), control, l_list, 0.0, 4.0);
  require(report.pass, "stability certificate failed");

  std::mt19937 rng(20260811);
  for (int l : l_list) {
    const double r = 1.0 / l;
    std::uniform_real_distribution<double> start(0.5 - 0.5 * r, 0.5 + 0.5 * r);
    for (int i = 0; i < 25; ++i) {
      const auto traj = solve_ivp(sys, control, 0.0, vec1(start(rng)), 4.0, {});
      for (const auto& sample : traj.samples)
        require(std::abs(sample.x(0) - 0.5) <= r + 1e-12,
                "radius " + fmt(r) + " breached in slow time");
      for (const auto& jump : traj.jumps)
        for (Eigen::Index j = 0; j < jump.s.size(); ++j)
          require(std::abs(jump.states(0, j) - 0.5) <= r + 1e-12,
                  "radius " + fmt(r) + " breached mid-transit");
    }
  }
}

// ---------------------------------------------------------------- criterion 5
void frobenius_coherence() {
  const std::vector<Shape> family = {shape_flat(), shape_tent(), shape_front(), shape_back()};

  const auto scalar = oracle::system1([](double, double) { return 0.0; },
                                      [](double, double x) { return std::sin(x) + 2.0; },
                                      oracle::box1(-1, 1, -3, 3));
  const auto scalar_report = frobenius_check(scalar, 150, 1e-5);
  require(scalar_report.pass && scalar_report.max_norm <= 1e-9,
          "one-dimensional bracket is not flat");
  const auto expo = oracle::system1([](double, double) { return 0.0; },
                                    [](double, double x) { return x; });
  require(shape_sensitivity(expo, 0.0, vec1(1.0), vec1(1.0), family) <= 1e-8,
          "one-dimensional endpoints drift across shapes");

  auto planar = oracle::noncommuting2d();
  planar.domain.x_lo = Eigen::VectorXd::Constant(2, -2);
  planar.domain.x_hi = Eigen::VectorXd::Constant(2, 2);
  const Eigen::VectorXd bracket = lie_bracket(planar, 0, 1, 0.0, vec2(0.7, -0.3));
  require(std::abs(bracket(0) - 0.0) <= 1e-5 && std::abs(bracket(1) - 1.0) <= 1e-5,
          "planar bracket is not (0, 1)");
  require(!frobenius_check(planar, 200, 1e-5).pass, "planar sweep unexpectedly passed");
  const std::vector<std::vector<Shape>> tuples = {{shape_front(), shape_back()},
                                                  {shape_back(), shape_front()},
                                                  {shape_flat(), shape_flat()}};
  require(shape_sensitivity(planar, 0.0, vec2(0.0, 0.0), vec2(1.0, 1.0), tuples) > 1e-3,
          "planar endpoints do not feel the shape");
}

// ---------------------------------------------------------------- criterion 6
void regularization_convergence() {
  const auto sys = oracle::system1([](double, double) { return 0.0; },
                                   [](double, double x) { return x; });
  ImpulseControl control(1, {ImpulseAtom(0.0, vec1(1.0), shape_flat())});
  const auto report = convergence_report(sys, control, -0.5, vec1(1.0), 0.5,
                                         {10, 40, 160, 640}, {-0.25, 0.3, 0.45}, {});
  require(report.converged, "convergence flag is false");
  for (size_t i = 1; i < report.sup_per_n.size(); ++i)
    require(report.sup_per_n[i] <= report.sup_per_n[i - 1],
            "distances are not decreasing over the n sweep");
  require(report.sup_per_n.back() < 1e-3, "final distance above 1e-3");

  const auto planar = oracle::noncommuting2d();
  auto limit_for = [&](const Shape& a1, const Shape& a2) {
    ImpulseControl c(2, {ImpulseAtom(0.0, vec2(1.0, 1.0), {a1, a2})});
    return regularized_solve(planar, c, 320, -0.5, Eigen::VectorXd::Zero(2), 0.5, {})
        .samples.back()
        .x;
  };
  const Eigen::VectorXd fb = limit_for(shape_front(), shape_back());
  const Eigen::VectorXd bf = limit_for(shape_back(), shape_front());
  require((fb - bf).lpNorm<Eigen::Infinity>() > 1e-3,
          "shape families converged to the same limit");
}

// ---------------------------------------------------------------- criterion 7
void gallery_representation_audit() {
  const auto files = gallery_scenarios(default_scenario_dir());
  require(files.size() == 7, "expected 7 bundled scenarios, found " +
                                 std::to_string(files.size()));
  for (const auto& file : files) {
    const Scenario sc = load_scenario(file);
    SolveOptions opts;
    opts.tol = sc.tol;

    const auto traj = solve_ivp(sc.system, sc.control, sc.t0, sc.x0, sc.T, opts);
    require(!traj.exit.has_value(), sc.name + ": unexpected domain exit");
    const double defect = representation_defect(sc.system, sc.control, traj, sc.x0);
    require(defect <= 10 * opts.tol,
            sc.name + ": integral identity defect " + fmt(defect) + " above 10*tol");

    const double margin = sc.system.domain.state_margin(sc.x0);
    const auto picard = contraction_solve(sc.system, sc.control, sc.t0, sc.x0,
                                          0.45 * margin, opts);
    require(picard.lambda < 1.0, sc.name + ": lambda not below 1");
    // compare on recorded samples (interpolation between coarse adaptive
    // steps would otherwise dominate the distance)
    const double upper = std::min(sc.t0 + picard.h, sc.T);
    SolveOptions dense = opts;
    for (int i = 0; i <= 64; ++i) dense.record_times.push_back(sc.t0 + (upper - sc.t0) * i / 64.0);
    const auto reference = solve_ivp(sc.system, sc.control, sc.t0, sc.x0, sc.T, dense);
    double worst = 0.0;
    for (double t : dense.record_times) {
      worst = std::max(worst, (picard.trajectory.state_at(t) - reference.state_at(t))
                                  .lpNorm<Eigen::Infinity>());
    }
    require(worst <= 1e-8,
            sc.name + ": fixed point differs from the marching solve by " + fmt(worst));
  }
}

// ---------------------------------------------------------------- criterion 8
void minimal_budget_oracle() {
  const auto sys = oracle::system1([](double, double x) { return x; },
                                   [](double, double) { return 1.0; },
                                   oracle::box1(-1.0, 2.0, -10.0, 10.0));
  // brute force over single atoms: for each firing time, bisect the smallest
  // magnitude whose terminal value reaches 1
  auto terminal = [&](double tau, double c) {
    ImpulseControl control(1, {ImpulseAtom(tau, vec1(c), shape_flat())});
    return solve_ivp(sys, control, 0.0, vec1(0.0), 1.0, {}).samples.back().x(0);
  };
  double best_tau = -1.0, best_c = 1e300;
  for (int i = 0; i < 20; ++i) {
    const double tau = i * 0.05;
    double lo = 1e-6, hi = 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (terminal(tau, mid) >= 1.0 ? hi : lo) = mid;
    }
    if (hi < best_c) {
      best_c = hi;
      best_tau = tau;
    }
  }
  require(best_tau == 0.0, "minimal budget not at tau = 0");
  require(std::abs(best_c - std::exp(-1.0)) <= 1e-4,
          "minimal budget " + fmt(best_c) + " != 1/e within 1e-4");

  const double with_half = terminal(0.0, 0.5);
  require(std::abs(with_half - 0.5 * std::exp(1.0)) <= 1e-6,
          "coefficient 1/2 does not reproduce e/2");
  require(std::abs(with_half - 1.0) > 0.3, "coefficient 1/2 unexpectedly reaches the target");
  std::printf("      minimal budget: tau = %.2f, c = %.6f (= 1/e); c = 1/2 instead gives "
              "x(1-) = %.6f, not 1\n",
              best_tau, best_c, with_half);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void()> body;
    double budget_s;
  };
  const std::vector<Criterion> criteria = {
      {1, "exponential jump endpoints and transits", exponential_jump_endpoints, 1.0},
      {2, "avoidance optimum at ln 2 with a regular-control gap", avoidance_example, 30.0},
      {3, "interval viability certificate and 200 randomized runs",
       interval_viability_certificate, 30.0},
      {4, "uniform stability certificate and nested-sphere runs",
       interval_stability_certificate, 10.0},
      {5, "bracket flatness vs shape sensitivity", frobenius_coherence, 5.0},
      {6, "mollified-control convergence", regularization_convergence, 60.0},
      {7, "gallery integral-identity audit and fixed-point cross-check",
       gallery_representation_audit, 60.0},
      {8, "minimal-budget impulse oracle", minimal_budget_oracle, 30.0},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      pass = false;
      detail = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (pass && elapsed > criterion.budget_s) {
      pass = false;
      detail = "runtime " + fmt(elapsed) + " s exceeds " + fmt(criterion.budget_s) + " s";
    }
    std::printf("[%d] %-58s %s (%.2f s)%s%s\n", criterion.id, criterion.title,
                pass ? "PASS" : "FAIL", elapsed, detail.empty() ? "" : " - ",
                detail.c_str());
    failures += pass ? 0 : 1;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
