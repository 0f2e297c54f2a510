#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ivt/scenario.hpp"
#include "ivt/shape.hpp"

namespace {

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("IVT_OUTPUT_DIR")) return env;
  return "ivt-out";
}

int cmd_run(const std::string& file, const std::filesystem::path& out_dir,
            const ivt::RunOverrides& overrides) {
  const auto outcome = ivt::run_scenario_file(file, out_dir, overrides);
  if (outcome.exit_code == 1) {
    std::cerr << "error: " << outcome.message << "\n";
  } else {
    std::cout << outcome.message << "\n";
    std::cout << "artifacts in " << out_dir.string() << "\n";
  }
  return outcome.exit_code;
}

int cmd_gallery(bool all, bool list, const std::filesystem::path& out_dir,
                const ivt::RunOverrides& overrides) {
  const auto dir = ivt::default_scenario_dir();
  const auto files = ivt::gallery_scenarios(dir);
  if (files.empty()) {
    std::cerr << "error: no bundled scenarios found under " << dir.string()
              << " (set IVT_SCENARIO_DIR)\n";
    return 1;
  }
  if (list || !all) {
    for (const auto& f : files) std::cout << f.stem().string() << "\n";
    return 0;
  }
  // batch mode: scenarios are independent, run them concurrently
  std::vector<std::future<std::pair<std::string, ivt::RunOutcome>>> futures;
  for (const auto& f : files) {
    futures.push_back(std::async(std::launch::async, [f, out_dir, overrides] {
      return std::make_pair(f.stem().string(),
                            ivt::run_scenario_file(f, out_dir / f.stem(), overrides));
    }));
  }
  int worst = 0;
  for (auto& fut : futures) {
    const auto [name, outcome] = fut.get();
    std::cout << name << ": "
              << (outcome.exit_code == 0 ? "ok"
                  : outcome.exit_code == 2 ? "certificate failed"
                                           : "error")
              << " - " << outcome.message << "\n";
    worst = std::max(worst, outcome.exit_code);
  }
  return worst;
}

int cmd_presets() {
  std::cout << "shapes:\n";
  for (const auto& name : ivt::shape_preset_names()) std::cout << "  " << name << "\n";
  const auto files = ivt::gallery_scenarios(ivt::default_scenario_dir());
  std::cout << "scenarios:\n";
  for (const auto& f : files) std::cout << "  " << f.stem().string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impulsive-system simulation and viability certification"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir = default_output_dir().string();
  double tol = -1.0;
  int steps = -1;

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_file, "scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("--tol", tol, "override the solver tolerance");
  run->add_option("--steps", steps, "override the fast-segment step count");

  bool gallery_all = false;
  bool gallery_list = false;
  auto* gallery = app.add_subcommand("gallery", "bundled scenarios");
  gallery->add_flag("--all", gallery_all, "run every bundled scenario");
  gallery->add_flag("--list", gallery_list, "list bundled scenarios");
  gallery->add_option("-o,--out", out_dir, "output directory");
  gallery->add_option("--tol", tol, "override the solver tolerance");

  auto* presets = app.add_subcommand("presets", "list built-in shapes and scenarios");

  CLI11_PARSE(app, argc, argv);

  ivt::RunOverrides overrides;
  if (tol > 0) overrides.tol = tol;
  if (steps > 0) overrides.fast_steps = steps;

  if (run->parsed()) return cmd_run(scenario_file, out_dir, overrides);
  if (gallery->parsed()) return cmd_gallery(gallery_all, gallery_list, out_dir, overrides);
  if (presets->parsed()) return cmd_presets();
  return 1;
}
