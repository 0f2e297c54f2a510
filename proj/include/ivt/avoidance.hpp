#ifndef IVT_AVOIDANCE_HPP
#define IVT_AVOIDANCE_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ivt/control.hpp"
#include "ivt/solve.hpp"
#include "ivt/system.hpp"
#include "ivt/viability.hpp"

namespace ivt {

enum class ViabilityOutcome { exited_slow, exited_fast, survived };

struct ViabilityTime {
  double T = 0.0;  // first exit time (== T_max when survived)
  ViabilityOutcome outcome = ViabilityOutcome::survived;
  std::optional<AuditExit> exit;
};

/// First time the solution (fast transits included) leaves M, bisection
/// refined on the slow axis to time_tol; fast-time exits report T = tau.
ViabilityTime viability_time(const SystemSpec& system, const ImpulseControl& control, double t0,
                             const Eigen::VectorXd& x0, const ConstraintSet& M, double T_max,
                             double time_tol = 1e-6, double eta_slack = 1e-9,
                             const SolveOptions& opts = {});

struct AtomCandidate {
  double tau = 0.0;
  Eigen::VectorXd c;
  double T = 0.0;
  bool admissible = true;
  ViabilityOutcome outcome = ViabilityOutcome::survived;
};

struct SingleAtomSearch {
  /// Winner under the tie-break (largest T, then smallest tau, then smallest
  /// |c|). The zero control is always a candidate; best_is_baseline marks it.
  AtomCandidate best;
  bool best_is_baseline = false;
  double baseline_T = 0.0;
  std::vector<AtomCandidate> table;
};

/// Exhaustive viability-time evaluation over a (tau, c) grid of single-atom
/// controls with the given shared shape; candidates failing admissibility
/// under the budget are recorded but not ranked.
SingleAtomSearch search_single_atom(const SystemSpec& system, double t0,
                                    const Eigen::VectorXd& x0, const ConstraintSet& M,
                                    double budget, const std::vector<double>& tau_grid,
                                    const std::vector<Eigen::VectorXd>& c_grid, const Shape& shape,
                                    double T_max, const SolveOptions& opts = {});

struct MultiAtomCandidate {
  std::vector<double> taus;
  std::vector<Eigen::VectorXd> cs;
  double T = 0.0;
};

struct MultiAtomSearch {
  MultiAtomCandidate best;
  bool best_is_baseline = false;
  double baseline_T = 0.0;
  int evaluated = 0;
  int admissible = 0;
};

/// Exhaustive search over controls with up to max_atoms atoms (clamped to 3;
/// the combinatorics explode beyond desk scale) drawn from the (tau, c)
/// grids. Ties prefer fewer atoms, then earlier firing times.
MultiAtomSearch search_multi_atom(const SystemSpec& system, double t0, const Eigen::VectorXd& x0,
                                  const ConstraintSet& M, double budget,
                                  const std::vector<double>& tau_grid,
                                  const std::vector<Eigen::VectorXd>& c_grid, const Shape& shape,
                                  int max_atoms, double T_max, const SolveOptions& opts = {});

struct RegularCandidate {
  std::vector<double> masses;  // per-bin integral, component-shared
  double T = 0.0;
};

struct RegularSearch {
  RegularCandidate best;
  std::vector<RegularCandidate> table;
  std::vector<double> bin_edges;
};

/// Piecewise-constant densities on k bins over (t0, window_end), bin masses
/// on a simplex grid with sum <= budget (every component carries the same
/// density). Demonstrates what regular controls can reach.
RegularSearch search_regular_controls(const SystemSpec& system, double t0,
                                      const Eigen::VectorXd& x0, const ConstraintSet& M,
                                      double budget, int bins, int levels, double window_end,
                                      double T_max, const SolveOptions& opts = {});

}  // namespace ivt

#endif
