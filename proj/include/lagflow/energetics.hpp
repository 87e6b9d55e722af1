#pragma once

#include <array>
#include <string>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/solver.hpp"

namespace lagflow {

inline constexpr std::array<const char*, 8> kEnergyComponentNames = {
    "rho0^(a+1) v^2",        "rho0^(a+1) Theta",        "rho0^(a+2) Theta^2",
    "rho0^(a+1) v_y^2",      "rho0^(a+1) Theta_y^2",    "rho0^a |v_y/J|^q J/J0",
    "rho0^(a+2) |Theta_y/J|^p J/J0", "rho0^a J_y^2"};

/// Weighted energy at one snapshot; E is the sum of the eight components.
struct EnergyReport {
  double t = 0.0;
  double E = 0.0;
  std::array<double, 8> components{};
  /// int rho0^alpha |Theta_y/J|^p J: the temperature-gradient weight of the
  /// strong-solution class, reported next to the rho0^(alpha+2) weight used in E.
  double theta_flux_alpha_weight = 0.0;
};

enum class J0Weighting {
  divide_by_J0,  // flux terms carry 1/J0 (restart-capable form)
  none,          // flux terms without 1/J0 (J0 = 1 form)
};

EnergyReport energy_functional(const State& state, const InitialData& init, const FluidParams& params,
                               J0Weighting weighting = J0Weighting::divide_by_J0);

/// Weighted dissipation; time derivatives are backward differences against `previous`.
/// Throws DomainError when the two snapshots share a time stamp.
double dissipation_functional(const State& state, const State& previous, const InitialData& init,
                              const FluidParams& params);

/// Total energy  int J0 rho0 (v^2/2 + Theta) dy  (conserved up to boundary work).
double total_energy(const State& state, const InitialData& init);

/// Momentum  int J0 rho0 v dy.
double total_momentum(const State& state, const InitialData& init);

enum class G0Variant {
  sixteen_q,  // exponents 16q/(2-q) and 10 alpha/(q-1)
  four_q,     // exponents 4q/(2-q) and 8 alpha/(q-1)
};

enum class M0Exponent {
  statement,  // (1 - margin)^{-2q/(q-1)}
  proof,      // (1 - margin)^{-2q/(q+1)}
};

struct EnvelopeOptions {
  G0Variant g0 = G0Variant::sixteen_q;
  M0Exponent m0 = M0Exponent::statement;
  /// Value substituted for every unspecified generic constant.
  double generic_C = 1.0;
};

/// H0(t) = sum(initial_norms) + G0 t together with M0, F0 and the admissibility margin
/// sampled on t_grid. Entries at times with margin >= 1 are NaN.
struct BoundEnvelope {
  std::vector<double> t;
  std::array<double, 8> initial_norms{};
  double H0_initial = 0.0;
  double G0 = 0.0;
  double q = 1.5;
  std::vector<double> H0, M0, F0, F0_integral, margin;
  EnvelopeOptions options;
  std::string note;

  double H0_at(double time) const { return H0_initial + G0 * time; }
  double margin_at(double time) const;
};

/// The (q+1)/(q-1) H^{(q+1)/(q-1)} t expression.
double admissibility_margin(double H, double t, double q);

double compute_G0(const InitialData& init, const FluidParams& params, const EnvelopeOptions& options = {});
std::array<double, 8> initial_weighted_norms(const InitialData& init, const FluidParams& params);

/// Throws DomainError when margin(t_grid[0]) >= 1.
BoundEnvelope bound_envelope(const InitialData& init, const FluidParams& params, const std::vector<double>& t_grid,
                             const EnvelopeOptions& options = {});

struct SnapshotAudit {
  double t = 0.0;
  double E = 0.0;
  double margin = 0.0;
  double ratio_E = 0.0;
  double ratio_supJ = 0.0;
  double ratio_infJ = 0.0;
  double ratio_rho_hi = 0.0;
  double ratio_rho_lo = 0.0;
  double inf_J = 0.0;
  double sup_J = 0.0;
  bool in_scope = true;
  bool passed = true;
  std::string failed;
};

struct BoundAudit {
  std::vector<SnapshotAudit> rows;
  /// First-snapshot values of (ratio_E, ratio_supJ, ratio_infJ, ratio_rho_hi, ratio_rho_lo).
  std::array<double, 5> calibration{};
  double slack = 0.05;
  bool passed = true;
  double first_failure_time = 0.0;
  std::string note;
};

/// Calibrated non-blow-up monitor: every ratio must stay <= (1 + slack) times its
/// value at the first snapshot. Snapshots beyond the admissible horizon are marked
/// out of scope and do not fail the audit. inf J <= 0 always fails.
BoundAudit check_bounds(const std::vector<State>& snapshots, const BoundEnvelope& envelope,
                        const InitialData& init, const FluidParams& params, double slack = 0.05);

/// Builds the envelope on the snapshot times and audits.
BoundAudit check_bounds(const std::vector<State>& snapshots, const InitialData& init, const FluidParams& params,
                        const EnvelopeOptions& options = {}, double slack = 0.05);

}  // namespace lagflow
