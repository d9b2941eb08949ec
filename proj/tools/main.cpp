// smallbody -- many-body small-scatterer wave scattering CLI.
//
//   smallbody props  --scenario s.json [--out DIR] [--threads N]
//   smallbody solve  --scenario s.json [--out DIR] [--method M] [--tol T]
//                    [--threads N]
//   smallbody check  --scenario s.json [--out DIR]

#include "smallbody/parallel.hpp"
#include "smallbody/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--scenario", opts.scenario_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--threads", opts.threads, "Worker threads for assembly")
      ->check(CLI::PositiveNumber);
}

int emit(const smallbody::ResultsBundle& bundle, const CommonOpts& opts) {
  auto files = smallbody::write_results(bundle, opts.out_dir);
  for (const auto& f : files) std::cout << f.string() << '\n';
  const auto& warnings = bundle.doc["diagnostics"]["warnings"];
  for (const auto& w : warnings)
    std::cerr << "warning: " << w.get<std::string>() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave scattering by many bodies small compared to the "
               "wavelength"};
  app.require_subcommand(1);

  CommonOpts props_opts, solve_opts, check_opts;
  std::string method_override;
  double tol_override = 0.0;

  CLI::App* props = app.add_subcommand(
      "props", "Shape properties only (capacitance, tensors)");
  add_common(props, props_opts);

  CLI::App* solve = app.add_subcommand("solve", "Full scattering pipeline");
  add_common(solve, solve_opts);
  solve->add_option("--method", method_override,
                    "Override solver method (direct | fixed-point)");
  solve->add_option("--tol", tol_override, "Override solver tolerance");

  CLI::App* check =
      app.add_subcommand("check", "Parse and regime diagnostics only");
  add_common(check, check_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (props->parsed()) {
      smallbody::set_thread_count(props_opts.threads);
      auto scenario = smallbody::load_scenario(props_opts.scenario_path);
      return emit(smallbody::run_properties(scenario), props_opts);
    }
    if (solve->parsed()) {
      smallbody::set_thread_count(solve_opts.threads);
      auto scenario = smallbody::load_scenario(solve_opts.scenario_path);
      if (!method_override.empty()) {
        if (method_override == "direct")
          scenario.solver.kind = smallbody::SolveMethod::Kind::Direct;
        else if (method_override == "fixed-point")
          scenario.solver.kind = smallbody::SolveMethod::Kind::FixedPoint;
        else
          throw smallbody::ScenarioError("unknown --method: " +
                                         method_override);
      }
      if (tol_override > 0.0) scenario.solver.tol = tol_override;
      return emit(smallbody::run(scenario), solve_opts);
    }
    // check
    auto scenario = smallbody::load_scenario(check_opts.scenario_path);
    return emit(smallbody::run_check(scenario), check_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
