#pragma once

#include <string>
#include <vector>

#include "lagflow/scenario.hpp"

namespace lagflow {

enum ExitCode : int {
  exit_ok = 0,
  exit_assertion = 1,
  exit_schema = 2,
  exit_physics = 3,
  exit_solver = 4,
};

/// Entry point of the command-line tool. argv[0] is the program name, argv[1] one of
/// run, verify, audit, extend, sweep, report.
int run_command(int argc, const char* const* argv);
int run_command(const std::vector<std::string>& args);

/// Loads a configuration file (or the defaults when `path` is empty) and applies
/// overrides given as a JSON object merged into the document before validation.
Scenario load_scenario(const std::string& path, const std::string& overrides_json = "{}");

/// Writes config.json, snapshots and diagnostics.csv for one scenario into its out_dir.
/// Returns an ExitCode; progress lines go to `log`.
int execute_run(const Scenario& scenario, std::string& log);

/// Sets a sweepable parameter (alpha, q, p, l, eps_reg, density_floor_eps, dt).
void set_sweep_parameter(Scenario& scenario, const std::string& param, double value);

}  // namespace lagflow
