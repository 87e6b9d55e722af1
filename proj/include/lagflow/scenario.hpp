#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/errors.hpp"
#include "lagflow/solver.hpp"

namespace lagflow {

/// Schema violation in a configuration document; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parameters outside the admissible physical range; `threshold` is the bound violated.
class PhysicsError : public Error {
 public:
  PhysicsError(const std::string& what, double threshold) : Error(what), threshold_(threshold) {}
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// Closed-form initial field. Families and their parameters:
///   constant      value
///   gaussian      offset + amplitude exp(-((y - center)/width)^2)
///   random_bumps  offset + sum of `count` gaussians of width `width`, centres
///                 uniform in [-spread, spread], heights uniform in [0, amplitude]
struct FieldSpec {
  std::string family = "constant";
  double value = 0.0;
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;
  double offset = 0.0;
  int count = 4;
  double spread = 5.0;
};

struct SweepSpec {
  std::string param;  // empty: no sweep
  std::vector<double> values;
  int workers = 0;    // 0: hardware concurrency
};

struct Scenario {
  FluidParams params;
  DensityProfile profile;
  double rho_uniform = 1.0;  // used when profile kind is custom ("uniform")
  FieldSpec v0{"gaussian", 0.0, 0.1, 1.0, 0.0, 0.0, 4, 5.0};
  FieldSpec Theta0{"gaussian", 0.0, 0.1, 1.0, 0.0, 0.0, 4, 5.0};
  FieldSpec J0{"constant", 1.0};
  double r_trunc = 20.0;
  long N = 801;
  SolverConfig solver;
  std::string out_dir = "out";
  int snapshot_every = 10;
  int diag_every = 10;
  double t_end = 0.1;
  std::uint64_t seed = 0;
  int segments = 4;
  double margin = 0.5;
  SweepSpec sweep;
};

/// Parses and validates a configuration document (JSON text). Throws ConfigError
/// for schema problems and PhysicsError for inadmissible parameters.
Scenario parse_scenario(const std::string& text);

/// Effective configuration as canonical JSON (all fields, fixed key order).
std::string echo_scenario(const Scenario& scenario);

/// Re-runs the physics validation (after command-line overrides).
void validate_scenario(const Scenario& scenario);

/// FNV-1a 64-bit hash of the canonical echo, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

Field sample_field(const FieldSpec& spec, const Grid& grid, std::uint64_t seed);

/// Grid, density profile and initial fields of a scenario (density floor applied).
InitialData build_initial_data(const Scenario& scenario);

}  // namespace lagflow
