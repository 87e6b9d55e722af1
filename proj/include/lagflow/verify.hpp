#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/solver.hpp"

namespace lagflow {

/// Closed-form fields of a manufactured solution and the derivatives the
/// sources need. All functions take (y, t) except rho0 and rho0_y.
struct ExactFields {
  using Fn = std::function<double(double, double)>;
  Fn J, J_t, J_y;
  Fn v, v_t, v_y;
  Fn Theta, Theta_t, Theta_y;
  std::function<double(double)> rho0, rho0_y;
  std::string name;
};

/// Trigonometric family on [-r, r] with zero boundary fluxes:
///   v     = -beta(t) (r/pi) cos(pi y / r),   beta(t) = b e^t
///   J     = 1 + B(t) sin(pi y / r),          B(t) = b (e^t - 1)
///   Theta = theta_bar + c(t) cos(pi y / r),  c(t) = c0 e^{-t}
///   rho0  = 1 + rho_amp cos(pi y / r).
struct TrigFamily {
  double r_trunc = 1.0;
  double b = 0.5;
  double c0 = 0.5;
  double theta_bar = 1.0;
  double rho_amp = 0.2;
};
ExactFields trig_family(const TrigFamily& spec);

/// v = 0, J = 1, Theta = theta_bar, uniform density: an exact steady state.
ExactFields steady_state_family(double theta_bar, double rho_uniform);

/// max |J_t - v_y| over the grid nodes at the given times.
double compatibility_residual(const ExactFields& fields, const Grid& grid, const std::vector<double>& times);

/// Body forces that make `fields` an exact solution of the regularized system
/// (flux Phi_eps, heating Phi_eps(v_y/J) v_y / J0). Smooth terms are sampled at
/// the nodes of `grid`; the two flux divergences are control-volume averages,
/// i.e. exact face-flux differences over the trapezoid weights.
Forcing manufactured_forcing(const ExactFields& fields, const FluidParams& params, const Grid& grid);

/// Initial data sampled from the exact fields at t = 0.
InitialData manufactured_initial_data(const ExactFields& fields, const Grid& grid);

enum class Refinement { space, time };

struct MmsStudy {
  ExactFields fields;
  FluidParams params;
  double r_trunc = 1.0;
  double t_end = 0.1;
  Refinement kind = Refinement::space;
  /// Space refinement: the N values; dt = dt_per_h2 * h^2 keeps the time error at the spatial order.
  std::vector<long> N_values = {101, 201, 401};
  double dt_per_h2 = 4.0;
  /// Time refinement: the dt values at N = N_fixed.
  std::vector<double> dt_values = {4e-3, 2e-3, 1e-3};
  long N_fixed = 801;
  SolverConfig solver;
};

struct ConvergenceRow {
  long N = 0;
  double dt = 0.0;
  double err_v = 0.0;
  double err_Theta = 0.0;
  double err_J = 0.0;
  double err = 0.0;  // max of the three
};

struct ConvergenceTable {
  std::string label;
  std::vector<ConvergenceRow> rows;
  /// log(e_k / e_{k+1}) / log(d_k / d_{k+1}) with d = h or dt.
  std::vector<double> orders;
  double compatibility_residual = 0.0;
  double min_order() const;
};

/// Throws DomainError when the compatibility residual exceeds 1e-12.
ConvergenceTable mms_convergence(const MmsStudy& study);

struct AuditReport {
  double mass_residual = 0.0;        // max |J rho - J0 rho0| / max(J0 rho0)
  double momentum_drift = 0.0;       // max |M(t) - M(0) - impulse(t)|
  double energy_drift = 0.0;         // max |E(t) - E(0) - W(t)| / |E(0)|
  double energy_drift_rate = 0.0;    // energy_drift / elapsed time
  double theta_min = 0.0;
  long theta_negative_nodes = 0;     // node values below -tol_neg, summed over snapshots
  double theta_negative_mass = 0.0;  // max_t int max(-Theta, 0)
  std::vector<double> mass_residual_t, energy_drift_t;
};

AuditReport conservation_audit(const Trajectory& traj, const InitialData& init, const FluidParams& params,
                               double tol_neg = 1e-10);

struct MonotonicityRow {
  double r = 0.0;
  long samples = 0;
  long violations = 0;
  double max_holder_ratio = 0.0;
  double max_scale_residual = 0.0;
  double identity_residual = 0.0;  // max ||eta|^{r-2} eta| / |eta|^{r-1} - 1|
};

struct InterpolationRow {
  double p = 0.0;
  double l = 0.0;
  long N = 0;
  double ratio = 0.0;         // max over the test family at N nodes
  double ratio_refined = 0.0; // same at 2N - 1 nodes
  double relative_change = 0.0;
};

struct OracleReport {
  std::uint64_t seed = 0;
  std::vector<MonotonicityRow> monotonicity;
  std::vector<InterpolationRow> interpolation;
};

/// Power-law flux monotonicity, its Hoelder ratio and homogeneity on seeded
/// random pairs, plus the sup-gradient interpolation ratio on a fixed family
/// of compactly supported profiles under grid doubling.
OracleReport inequality_oracles(std::uint64_t seed, long samples, const std::vector<double>& r_values);

/// Interpolation ratio sup|phi'| / [(int |phi'|^{2(l-p+2)})(int |phi'|^{2(p-1)} |phi''|^2)]^{1/(2(l+2))}
/// for phi(x) = (1 - x^2)^4 cos(omega x) on [-1, 1] sampled at N nodes.
double interpolation_ratio(double p, double l, double omega, long N);

struct ReductionReport {
  int steps = 0;
  double max_discrepancy = 0.0;
  std::vector<double> discrepancy;  // after each step
};

/// Marches the solver and an independently assembled sparse linear solve of the
/// same discrete system (q = p = 2, eps_reg = 0) side by side. Throws DomainError
/// in strict mode or for other exponents.
ReductionReport reduction_check(const FluidParams& params, const InitialData& init, const SolverConfig& cfg,
                                int steps);

}  // namespace lagflow
