#pragma once

#include "cshock/model.hpp"
#include "cshock/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cshock::cli {

enum class Command { solve, simulate, verify, compare, sweep };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

/// Process exit codes.
enum Exit : int { ok = 0, validation_failure = 2, numerical_failure = 3, property_violation = 4 };

struct GridSpec {
  long M = 200;  // time steps
  long N = 400;  // space intervals
};

/// "MxN", e.g. "200x400".
GridSpec parse_grid(const std::string& s);

struct ExperimentSpec {
  Command command = Command::solve;
  std::string preset = "custom";  // a preset name, or "custom" with `config`
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "out";
  GridSpec grid;
  SimConfig sim;
  long field_nt = 41;  // strategy tabulation nodes in t and y
  long field_ny = 81;
  std::string strategy = "optimal";  // simulate: optimal | no-shock | no-reinsurance
  std::string sweep_param = "k";     // k | theta_r | lambda0 | gamma
  std::vector<double> sweep_values;  // empty: a default range around the config

  /// Structural checks; throws ConfigError.
  void check() const;
};

ModelConfig resolve_model(const ExperimentSpec& spec);

/// Runs one experiment, writes artifacts and a manifest to spec.out, and
/// returns an Exit code. Progress and verdicts go to `log`.
int run(const ExperimentSpec& spec, std::ostream& log);

}  // namespace cshock::cli
