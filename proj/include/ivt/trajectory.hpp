#ifndef IVT_TRAJECTORY_HPP
#define IVT_TRAJECTORY_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ivt {

/// Which one-sided limit a sample records at an atom time.
enum class SampleSide { left = -1, interior = 0, right = 1 };

struct TrajectorySample {
  double t = 0.0;
  SampleSide side = SampleSide::interior;
  Eigen::VectorXd x;
  /// Slow right-hand side at the sample, kept for Hermite interpolation and
  /// integral audits.
  Eigen::VectorXd dxdt;
};

/// Fast-time transit gamma_tau(s) at one atom, sampled on a uniform s-grid
/// over J with both endpoints.
struct FastCurve {
  double tau = 0.0;
  Eigen::VectorXd s;
  Eigen::MatrixXd states;  // n x (steps+1), column j is gamma(s_j)

  Eigen::VectorXd entry() const { return states.col(0); }
  Eigen::VectorXd exitpoint() const { return states.col(states.cols() - 1); }
  /// Linear interpolation between s-nodes.
  Eigen::VectorXd at(double s_query) const;
};

struct ExitRecord {
  bool fast = false;  // true: left mid-jump at (tau, s); false: slow time t
  double t = 0.0;
  double s = 0.0;
  Eigen::VectorXd x;
  std::string reason;
};

/// Slow-time path plus the fast transit at each atom. Atom times always
/// appear as a (left, right) sample pair.
struct DynamicTrajectory {
  int n = 0;
  std::vector<TrajectorySample> samples;
  std::vector<FastCurve> jumps;
  std::optional<ExitRecord> exit;

  double front_time() const { return samples.front().t; }
  double back_time() const { return samples.back().t; }

  /// Cubic Hermite interpolation on the slow path; at an atom time the right
  /// limit is returned.
  Eigen::VectorXd state_at(double t) const;

  /// Left/right limits recorded at the atom with the given time; throws if
  /// no such atom pair exists.
  Eigen::VectorXd left_limit(double tau) const;
  Eigen::VectorXd right_limit(double tau) const;

  /// Columns t, side (-/+/interior), x_1..x_n.
  void write_csv(std::ostream& os) const;
  /// Columns s, gamma_1..gamma_n of jump k.
  void write_fast_csv(std::ostream& os, int k) const;
};

}  // namespace ivt

#endif
