#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/grid.hpp"

namespace lagflow {

enum class BoundaryMode { neumann_zero };

struct SolverConfig {
  double dt = 1e-3;
  double picard_tol = 1e-12;
  int picard_max = 60;
  double newton_tol = 1e-12;
  int newton_max = 80;
  double J_floor = 1e-8;
  BoundaryMode bc_mode = BoundaryMode::neumann_zero;
  /// Added to rho0 before a run (regularized-vacuum approximation). 0 disables.
  double density_floor_eps = 0.0;
  /// Temperatures below -tol_neg are reported, never clipped.
  double tol_neg = 1e-10;
  /// How many times a failing step may be retried with half the step.
  int max_halvings = 6;
};

struct StepReport {
  int picard_iters = 0;
  int newton_iters_momentum = 0;
  int newton_iters_temperature = 0;
  std::vector<double> contraction_ratios;
  double inf_J = 0.0;
  double sup_J = 0.0;
  double theta_min = 0.0;
  /// Work done by the boundary pressure over the step: dt * (v P)|_{left} - dt * (v P)|_{right}.
  double boundary_work = 0.0;
  /// Impulse of the boundary pressure: dt * (P|_{left} - P|_{right}).
  double boundary_impulse = 0.0;
  int halvings = 0;
};

/// Optional body forces, evaluated at the new time level. Each returns a nodal
/// field added to the right-hand side of
///   rho0 v_t     = (1/J0)(sigma - p)_y + f_v,
///   rho0 Theta_t = (1/J0)(heat flux)_y + heating - pressure work + f_Theta.
struct Forcing {
  std::function<Field(double t)> momentum;
  std::function<Field(double t)> temperature;
};

/// J_new = J_prev + dt ddy(v_mid). Throws JacobianDegeneracy when inf J_new <= J_floor.
Field update_jacobian(const Eigen::Ref<const Field>& J_prev, const Eigen::Ref<const Field>& v_mid,
                      double dt, const Grid& grid, double J_floor);

struct DiffusionResult {
  Field w;
  int newton_iters = 0;
  double residual = 0.0;
};

/// Backward-Euler step of the weighted power diffusion
///   a (w - w_old)/dt = (1/J0) d/dy Phi_eps(w_y / J) + source
/// with zero flux at both ends. Fluxes live on cell faces (J averaged there);
/// the discrete divergence is the trapezoid-weighted adjoint of the face
/// gradient, so  sum_i omega_i J0_i a_i w_i  changes only through the source.
///
/// Solved by Newton with a line search on the convex potential whose gradient
/// is the residual. Converged when max_i |residual_i / a_i| <=
/// newton_tol (1 + max|w_old|); the residual is scaled by dt.
DiffusionResult implicit_power_diffusion_step(const Eigen::Ref<const Field>& a,
                                              const Eigen::Ref<const Field>& w_old, double r,
                                              double eps, const Eigen::Ref<const Field>& J,
                                              const Eigen::Ref<const Field>& J0,
                                              const Eigen::Ref<const Field>& source, double dt,
                                              const Grid& grid, const SolverConfig& cfg,
                                              const Field* initial_guess = nullptr);

/// Cell-face values of the discrete gradient (w_{i+1} - w_i)/h, length N-1.
Field face_gradient(const Eigen::Ref<const Field>& w, const Grid& grid);

/// Face average (w_i + w_{i+1})/2, length N-1.
Field face_average(const Eigen::Ref<const Field>& w);

/// One time step of the lagged fixed-point map (v, Theta) -> J -> rho -> (V, vartheta).
/// Throws NonContraction when picard_max is reached, JacobianDegeneracy or
/// NewtonFailure from the sub-steps.
std::pair<State, StepReport> picard_step(const State& state, const InitialData& init, double dt,
                                         const SolverConfig& cfg, const FluidParams& params,
                                         const Forcing* forcing = nullptr);

struct RunFailure {
  std::string kind;  // "degeneracy", "non_contraction", "newton"
  std::string message;
  double t = 0.0;
};

struct Trajectory {
  std::vector<State> snapshots;
  std::vector<StepReport> reports;  // reports[k] produced snapshots[k+1] (with record_every = 1)
  std::optional<RunFailure> failure;
  /// Accumulated boundary pressure work up to each snapshot.
  std::vector<double> boundary_work;
  std::vector<double> boundary_impulse;

  bool ok() const { return !failure.has_value(); }
};

/// Marches from t = 0 to t_end in ceil(t_end/cfg.dt) equal steps; failing steps are retried
/// with halved sub-steps up to cfg.max_halvings times. On failure the partial
/// trajectory is returned with `failure` set. record_every thins the stored
/// snapshots (the final one is always stored).
///
/// `init` must already carry any density floor; use apply_density_floor.
Trajectory run(const InitialData& init, const SolverConfig& cfg, const FluidParams& params,
               double t_end, const Forcing* forcing = nullptr, int record_every = 1);

/// Continues a run from an arbitrary state up to t_end (absolute time).
Trajectory run_from(const State& start, const InitialData& init, const SolverConfig& cfg,
                    const FluidParams& params, double t_end, const Forcing* forcing = nullptr,
                    int record_every = 1);

/// rho0 + eps with the derived bounds refreshed; identity for eps = 0.
InitialData apply_density_floor(const InitialData& init, double eps);

}  // namespace lagflow
