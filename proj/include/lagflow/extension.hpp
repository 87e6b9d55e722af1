#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lagflow/core_model.hpp"
#include "lagflow/solver.hpp"

namespace lagflow {

/// H(t) (1 - sigma c0 H(t)^sigma (t - T0))^(-1/sigma) with H(t) = f0 + int_T0^t h.
/// An empty h_fn means h = 0. Throws HorizonExceeded (carrying the critical time)
/// when sigma c0 H^sigma (t - T0) >= 1.
double local_gronwall_bound(double f0, const std::function<double(double)>& h_fn, double c0, double sigma,
                            double T0, double t);

/// Largest t (to 1e-10 relative) with (q+1)/(q-1) H(t)^((q+1)/(q-1)) t < margin_target.
/// H must be positive and nondecreasing; margin_target in (0, 1].
double admissible_time(const std::function<double(double)>& H_fn, double q, double margin_target);

/// Step-length function, k >= 1, q in (1, 2).
double g_of_k(double k, double q);

/// The same expression with a minus sign inside the last factor. Only for
/// inspection: throws DomainError wherever that factor is negative.
double g_of_k_minus_variant(double k, double q);

/// g(k) / g(eta^((q-1)^2/(2(q+1))) k).
double h_of_k_eta(double k, double eta, double q);

/// The expanded closed form of h term by term. Differs from h_of_k_eta (it is not
/// 1 at eta = 1); kept for inspection only.
double h_of_k_eta_expanded(double k, double eta, double q);

/// Cumulative values of int_1^Lambda h^((q+1)/(q-1))(2, eta) d eta at each Lambda
/// (sorted ascending, all >= 1).
std::vector<double> divergence_partial_sums(double q, const std::vector<double>& lambdas, double k = 2.0);

/// Same cumulative integrals for the algebraic minorant
/// c (1 + 2^((q^2+4q-1)/(q-1)^2) eta)^(-1).
std::vector<double> comparison_partial_sums(double q, const std::vector<double>& lambdas);

struct ExtensionConfig {
  double margin_target = 0.5;
  double generic_C = 1.0;
  std::vector<double> lambdas = {1e1, 1e2, 1e3, 1e4};
  /// Geometric ratio of the eta search grid.
  double eta_ratio = 1.0442737824274138;  // 2^(1/16)
};

struct Segment {
  double T_start = 0.0;
  double T_end = 0.0;
  double H_start = 0.0;    // restart functional at T_start
  double G = 0.0;          // growth rate of the segment envelope
  double margin_end = 0.0; // admissibility margin reached at T_end
  double delta = 0.0;      // inf J at T_end
  double eta = 1.0;
  double step_lower_bound = 0.0;
  bool completed = false;
};

struct Schedule {
  std::vector<Segment> segments;
  double cumulative_time = 0.0;
  /// (Lambda, int_1^Lambda h^((q+1)/(q-1))(2, eta) d eta).
  std::vector<std::pair<double, double>> divergence_partial_sums;
  /// Running sums of the recorded step lower bounds.
  std::vector<double> lower_bound_partial_sums;
  std::vector<State> end_states;
  std::optional<RunFailure> failure;
};

/// Runs the solver from `start` (at start.t) up to the absolute time t_end.
using SegmentRunner = std::function<Trajectory(const State& start, double t_end)>;

/// Wraps run_from with fixed initial data and solver settings.
SegmentRunner make_segment_runner(const InitialData& init, const SolverConfig& cfg, const FluidParams& params);

/// Restart data at a state: the state's density, Jacobian, velocity and temperature
/// play the roles of rho0, J0, v0, Theta0.
InitialData restart_data(const State& state, const InitialData& init);

/// Growth rate of the segment envelope for restart data with inf J = delta.
double segment_growth(const InitialData& restart, const FluidParams& params, double delta, double generic_C);

/// Smallest eta on the geometric grid with round(2 eta^((q-1)^2/(2(q+1)))) >= 3 and
/// h^((q+1)/(q-1))(2, eta) < step.
double select_eta(double step, double q, double eta_ratio);

Schedule schedule_extension(const SegmentRunner& run_fn, const InitialData& initial, const FluidParams& params,
                            const ExtensionConfig& cfg, int L_max);

}  // namespace lagflow
