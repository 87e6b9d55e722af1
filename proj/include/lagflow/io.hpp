#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/energetics.hpp"
#include "lagflow/extension.hpp"
#include "lagflow/solver.hpp"

namespace lagflow {

/// %.17g formatting; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double x);

/// snap_<t>.csv with t printed to nine decimals.
std::string snapshot_name(double t);

void write_snapshot(const std::filesystem::path& path, const State& state, const Grid& grid,
                    const std::string& config_hash);

/// Reads a snapshot written by write_snapshot; the time comes from the header.
/// Throws Error on malformed content.
State read_snapshot(const std::filesystem::path& path, const Grid& grid);

/// One row per stored snapshot: t, E, D, the eight energy components, inf_J, sup_J,
/// theta_min, mass_residual, energy_drift, margin, ratio_E, ratio_supJ, ratio_infJ.
std::vector<std::string> diagnostics_columns();

void write_diagnostics(const std::filesystem::path& path, const Trajectory& traj, const InitialData& init,
                       const FluidParams& params, const std::string& config_hash);

void write_schedule(const std::filesystem::path& path, const Schedule& schedule, const std::string& config_hash);

}  // namespace lagflow
