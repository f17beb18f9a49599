#include "cshock/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace cshock::cli;

  CLI::App app{"Optimal reinsurance and investment under a common shock"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string config, grid;
  bool no_antithetic = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "model config JSON (preset 'custom')")->check(CLI::ExistingFile);
    sub->add_option("--preset", spec.preset, "fig1 | fig2 | evp-comparison | sim-evp | sim-variance | sim-no-shock | custom")
        ->capture_default_str();
    sub->add_option("--out", spec.out, "output directory")->capture_default_str();
    sub->add_option("--seed", spec.sim.seed, "random seed")->capture_default_str();
    sub->add_option("--paths", spec.sim.paths, "Monte Carlo paths")->capture_default_str();
    sub->add_option("--steps", spec.sim.steps, "time steps per path")->capture_default_str();
    sub->add_option("--grid", grid, "PDE grid MxN (time steps x space intervals)")->default_str("200x400");
    sub->add_flag("--no-antithetic", no_antithetic, "independent paths instead of antithetic pairs");
  };

  auto* solve = app.add_subcommand("solve", "strategy field, psi PDE solutions and V(0); figure data for fig1/fig2");
  auto* simulate = app.add_subcommand("simulate", "expected utility of a named strategy by simulation");
  auto* verify = app.add_subcommand("verify", "paired optimality and PDE vs Monte Carlo consistency");
  auto* compare = app.add_subcommand("compare", "shock vs no-shock strategy comparison");
  auto* sweep = app.add_subcommand("sweep", "one-parameter sweep of the strategy at t = 0");
  for (auto* sub : {solve, simulate, verify, compare, sweep}) common(sub);
  simulate->add_option("--strategy", spec.strategy, "optimal | no-shock | no-reinsurance")->capture_default_str();
  sweep->add_option("--param", spec.sweep_param, "k | theta_r | lambda0 | gamma")->capture_default_str();
  sweep->add_option("--values", spec.sweep_values, "comma-separated values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : Exit::validation_failure;
  }

  try {
    spec.command = command_from_string(app.get_subcommands().front()->get_name());
    if (!config.empty()) {
      spec.config = config;
      if (spec.preset == "custom" || spec.preset.empty()) spec.preset = "custom";
    }
    if (!grid.empty()) spec.grid = parse_grid(grid);
    spec.sim.antithetic = !no_antithetic;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::validation_failure;
  }
  return run(spec, std::cout);
}
