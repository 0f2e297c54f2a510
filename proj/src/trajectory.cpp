#include "ivt/trajectory.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "ivt/errors.hpp"

namespace ivt {

namespace {

void print_value(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

Eigen::VectorXd FastCurve::at(double s_query) const {
  const auto m = s.size();
  if (s_query <= s(0)) return states.col(0);
  if (s_query >= s(m - 1)) return states.col(m - 1);
  const double u = (s_query - s(0)) / (s(m - 1) - s(0)) * static_cast<double>(m - 1);
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), m - 2);
  const double w = u - static_cast<double>(j);
  return (1.0 - w) * states.col(j) + w * states.col(j + 1);
}

Eigen::VectorXd DynamicTrajectory::state_at(double t) const {
  if (samples.empty()) throw ContractError("empty trajectory");
  // strict comparison: at an atom on the very first sample the right limit
  // must win, which the bracketing logic below handles
  if (t < samples.front().t) return samples.front().x;
  if (t >= samples.back().t) return samples.back().x;
  // find the bracketing pair; at an atom time the right-limit sample wins
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const TrajectorySample& s) { return v < s.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (a.t == b.t) return b.x;
  const double h = b.t - a.t;
  const double u = (t - a.t) / h;
  // cubic Hermite with the stored slopes
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return h00 * a.x + h10 * h * a.dxdt + h01 * b.x + h11 * h * b.dxdt;
}

Eigen::VectorXd DynamicTrajectory::left_limit(double tau) const {
  for (const auto& s : samples) {
    if (s.t == tau && s.side == SampleSide::left) return s.x;
  }
  throw ContractError("no left limit recorded at the requested time");
}

Eigen::VectorXd DynamicTrajectory::right_limit(double tau) const {
  for (const auto& s : samples) {
    if (s.t == tau && s.side == SampleSide::right) return s.x;
  }
  throw ContractError("no right limit recorded at the requested time");
}

void DynamicTrajectory::write_csv(std::ostream& os) const {
  os << "t,side";
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  os << "\n";
  for (const auto& s : samples) {
    print_value(os, s.t);
    os << ',' << (s.side == SampleSide::left ? "-" : s.side == SampleSide::right ? "+" : "interior");
    for (int i = 0; i < n; ++i) {
      os << ',';
      print_value(os, s.x(i));
    }
    os << "\n";
  }
}

void DynamicTrajectory::write_fast_csv(std::ostream& os, int k) const {
  const auto& curve = jumps.at(static_cast<size_t>(k));
  os << "s";
  for (int i = 1; i <= n; ++i) os << ",gamma_" << i;
  os << "\n";
  for (Eigen::Index j = 0; j < curve.s.size(); ++j) {
    print_value(os, curve.s(j));
    for (int i = 0; i < n; ++i) {
      os << ',';
      print_value(os, curve.states(i, j));
    }
    os << "\n";
  }
}

}  // namespace ivt
