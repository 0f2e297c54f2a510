#ifndef IVT_SCENARIO_HPP
#define IVT_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ivt/control.hpp"
#include "ivt/expr.hpp"
#include "ivt/system.hpp"
#include "ivt/viability.hpp"

namespace ivt {

enum class TaskType { solve, regularize, frobenius, viability, stability, avoid };

/// A declarative scenario: system, control, constraints, and one task.
struct Scenario {
  std::string name;
  std::string notes;
  int n = 0;
  SystemSpec system;
  ImpulseControl control{1};  // placeholder until parsed
  std::optional<ConstraintSet> constraints;
  Eigen::VectorXd x0;
  double t0 = 0.0;
  double T = 0.0;
  double tol = 1e-8;
  TaskType task = TaskType::solve;
  nlohmann::json task_params;
  nlohmann::json raw;
};

/// Overrides from the command line.
struct RunOverrides {
  std::optional<double> tol;
  std::optional<int> fast_steps;
};

struct RunOutcome {
  /// 0 ok, 1 error, 2 certificate failed.
  int exit_code = 0;
  std::string message;
  std::vector<std::string> outputs;
};

/// Parses and validates a scenario document. Errors carry a JSON-pointer
/// style path to the offending field.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& source_name);
Scenario load_scenario(const std::filesystem::path& file);

/// Runs the scenario task and writes CSV/JSON artifacts plus a manifest into
/// out_dir.
RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                        const RunOverrides& overrides = {});
RunOutcome run_scenario_file(const std::filesystem::path& file,
                             const std::filesystem::path& out_dir,
                             const RunOverrides& overrides = {});

/// Bundled scenario files (IVT_SCENARIO_DIR env overrides the build-time
/// default).
std::filesystem::path default_scenario_dir();
std::vector<std::filesystem::path> gallery_scenarios(const std::filesystem::path& dir);

/// Parses a shape specification: preset name, {"expr": ...}, or
/// {"samples": [...]}.
Shape parse_shape_spec(const nlohmann::json& spec, const std::string& path);

/// FNV-1a content hash used by the run manifest.
std::string content_hash_hex(const std::string& bytes);

}  // namespace ivt

#endif
