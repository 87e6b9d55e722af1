#include "lagflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "tridiagonal.hpp"

namespace lagflow {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Node-wise divergence of face values with prescribed outer fluxes, using the
// trapezoid control volumes (h inside, h/2 at the ends).
Field face_divergence(const Field& face, double left, double right, const Grid& grid) {
  const Eigen::Index n = grid.N;
  Field d(n);
  const double h = grid.h;
  d(0) = (face(0) - left) / (0.5 * h);
  d.segment(1, n - 2) = (face.tail(n - 2) - face.head(n - 2)) / h;
  d(n - 1) = (right - face(n - 2)) / (0.5 * h);
  return d;
}

// Spreads face quantities to nodes so that sum_i omega_i out_i = h sum_f face_f.
Field face_to_node_density(const Field& face, const Grid& grid) {
  const Eigen::Index n = grid.N;
  Field out(n);
  out(0) = face(0);
  out(n - 1) = face(n - 2);
  out.segment(1, n - 2) = 0.5 * (face.head(n - 2) + face.tail(n - 2));
  return out;
}

StepReport merge_reports(const StepReport& a, const StepReport& b) {
  StepReport m = b;
  m.picard_iters = a.picard_iters + b.picard_iters;
  m.newton_iters_momentum = a.newton_iters_momentum + b.newton_iters_momentum;
  m.newton_iters_temperature = a.newton_iters_temperature + b.newton_iters_temperature;
  m.contraction_ratios = a.contraction_ratios;
  m.contraction_ratios.insert(m.contraction_ratios.end(), b.contraction_ratios.begin(), b.contraction_ratios.end());
  m.theta_min = std::min(a.theta_min, b.theta_min);
  m.boundary_work = a.boundary_work + b.boundary_work;
  m.boundary_impulse = a.boundary_impulse + b.boundary_impulse;
  m.halvings = std::max(a.halvings, b.halvings);
  return m;
}

}  // namespace

Field face_gradient(const Eigen::Ref<const Field>& w, const Grid& grid) {
  const Eigen::Index n = w.size();
  return (w.tail(n - 1) - w.head(n - 1)) / grid.h;
}

Field face_average(const Eigen::Ref<const Field>& w) {
  const Eigen::Index n = w.size();
  return 0.5 * (w.tail(n - 1) + w.head(n - 1));
}

Field update_jacobian(const Eigen::Ref<const Field>& J_prev, const Eigen::Ref<const Field>& v_mid,
                      double dt, const Grid& grid, double J_floor) {
  require_length(J_prev, grid, "update_jacobian");
  require_length(v_mid, grid, "update_jacobian");
  if ((J_prev <= 0.0).any()) throw DomainError("update_jacobian: J_prev must be positive");
  Field J = J_prev + dt * ddy(v_mid, grid);
  const double inf_J = J.minCoeff();
  if (!(inf_J > J_floor))
    throw JacobianDegeneracy("Jacobian degeneracy: inf J = " + num(inf_J) + " <= J_floor = " + num(J_floor),
                             inf_J);
  return J;
}

DiffusionResult implicit_power_diffusion_step(const Eigen::Ref<const Field>& a,
                                              const Eigen::Ref<const Field>& w_old, double r,
                                              double eps, const Eigen::Ref<const Field>& J,
                                              const Eigen::Ref<const Field>& J0,
                                              const Eigen::Ref<const Field>& source, double dt,
                                              const Grid& grid, const SolverConfig& cfg,
                                              const Field* initial_guess) {
  require_length(a, grid, "implicit_power_diffusion_step(a)");
  require_length(w_old, grid, "implicit_power_diffusion_step(w_old)");
  require_length(J, grid, "implicit_power_diffusion_step(J)");
  require_length(J0, grid, "implicit_power_diffusion_step(J0)");
  require_length(source, grid, "implicit_power_diffusion_step(source)");
  if ((a <= 0.0).any()) throw DomainError("implicit_power_diffusion_step: coefficient must be positive");
  if ((J <= 0.0).any()) throw JacobianDegeneracy("implicit_power_diffusion_step: J <= 0", J.minCoeff());
  if (!(dt > 0.0)) throw DomainError("implicit_power_diffusion_step: dt must be positive");
  if (!(r > 1.0 && r <= 2.0)) throw DomainError("implicit_power_diffusion_step: exponent must lie in (1,2]");
  if (eps == 0.0 && r < 2.0)
    throw DomainError("implicit_power_diffusion_step: r < 2 needs eps > 0 for a bounded Newton derivative");

  const double h = grid.h;
  const Eigen::Index n = grid.N;
  const Field omega = trapezoid_weights(grid);
  const Field mass = omega * J0 * a;  // diagonal of the potential's quadratic part
  const Field Jf = face_average(J);
  const Field load = omega * J0 * source;

  // Gradient of the potential: omega J0 [a (w - w_old) - dt src] - dt (F_{i+1/2} - F_{i-1/2}).
  const auto gradient = [&](const Field& w, const Field& flux) {
    Field g = mass * (w - w_old) - dt * load;
    g.head(n - 1) -= dt * flux;
    g.tail(n - 1) += dt * flux;
    return g;
  };

  DiffusionResult out;
  Field w = initial_guess ? *initial_guess : Field(w_old);
  require_length(w, grid, "implicit_power_diffusion_step(initial_guess)");
  const double tol = cfg.newton_tol * (1.0 + w_old.abs().maxCoeff());

  Field s = face_gradient(w, grid) / Jf;
  Field flux = power_flux(s, r, eps);
  Field g = gradient(w, flux);
  double res = (g / mass).abs().maxCoeff();
  for (int it = 0;; ++it) {
    out.newton_iters = it;
    out.residual = res;
    if (res <= tol) break;
    if (it >= cfg.newton_max)
      throw NewtonFailure("Newton did not converge: residual " + num(res) + " after " +
                              std::to_string(it) + " iterations",
                          res);

    const Field c = power_flux_derivative(s, r, eps) / (h * Jf);
    Field diag = mass;
    diag.head(n - 1) += dt * c;
    diag.tail(n - 1) += dt * c;
    Field lower = Field::Zero(n), upper = Field::Zero(n);
    upper.head(n - 1) = -dt * c;
    lower.tail(n - 1) = -dt * c;
    const Field step = detail::solve_tridiagonal(lower, diag, upper, -g);

    // The potential is convex, so phi'(lambda) = g(w + lambda step) . step is increasing.
    // Take the full step while phi' stays non-positive; otherwise bracket the line
    // minimum and shrink until |phi'| has halved. Potential values themselves are
    // flat to rounding near convergence and are not compared.
    const double slope0 = (g * step).sum();
    Field w_try, s_try, flux_try, g_try;
    double res_try = 0.0;
    const auto trial = [&](double lambda) {
      w_try = w + lambda * step;
      s_try = face_gradient(w_try, grid) / Jf;
      flux_try = power_flux(s_try, r, eps);
      g_try = gradient(w_try, flux_try);
      res_try = (g_try / mass).abs().maxCoeff();
      return (g_try * step).sum();
    };
    double lo = 0.0, hi = 1.0;
    double d = trial(hi);
    if (slope0 < 0.0 && d > 0.5 * std::abs(slope0)) {
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        d = trial(mid);
        if (std::abs(d) <= 0.5 * std::abs(slope0)) break;
        (d < 0.0 ? lo : hi) = mid;
      }
    }
    w = std::move(w_try);
    s = std::move(s_try);
    flux = std::move(flux_try);
    g = std::move(g_try);
    res = res_try;
  }
  out.w = std::move(w);
  return out;
}

std::pair<State, StepReport> picard_step(const State& state, const InitialData& init, double dt,
                                         const SolverConfig& cfg, const FluidParams& prm,
                                         const Forcing* forcing) {
  const Grid& grid = init.grid;
  require_length(state.J, grid, "picard_step(J)");
  require_length(state.v, grid, "picard_step(v)");
  require_length(state.Theta, grid, "picard_step(Theta)");
  if ((state.J <= 0.0).any()) throw JacobianDegeneracy("picard_step: J <= 0 on entry", state.J.minCoeff(), state.t);
  if (!(dt > 0.0)) throw DomainError("picard_step: dt must be positive");

  const Eigen::Index n = grid.N;
  const double t_new = state.t + dt;
  const Field& rho0 = init.rho0;
  const Field& J0 = init.J0;

  Field f_mom = Field::Zero(n), f_temp = Field::Zero(n);
  if (forcing && forcing->momentum) f_mom = forcing->momentum(t_new);
  if (forcing && forcing->temperature) f_temp = forcing->temperature(t_new);

  StepReport rep;
  Field V_lag = state.v;
  Field T_lag = state.Theta;
  double prev_diff = -1.0;
  Field V, Theta_new;
  bool converged = false;

  for (int k = 1; k <= cfg.picard_max; ++k) {
    const Field J = update_jacobian(state.J, 0.5 * (state.v + V_lag), dt, grid, cfg.J_floor);
    const Field rho = density_from_jacobian(J, J0, rho0);
    const Field P = prm.R * rho * T_lag;
    const Field Pf = face_average(P);

    // Momentum: rho0 (V - v)/dt = (1/J0)(sigma(V) - P)_y + f_v.
    const Field mom_src = -face_divergence(Pf, P(0), P(n - 1), grid) / J0 + f_mom;
    const auto mom = implicit_power_diffusion_step(rho0, state.v, prm.q, prm.eps_reg, J, J0, mom_src, dt,
                                                   grid, cfg, &V_lag);
    V = mom.w;

    // Stress work on faces, plus the kinetic energy that backward Euler removes,
    // so that sum omega J0 rho0 (v^2/2 + Theta) balances exactly.
    const Field Jf = face_average(J);
    const Field dV = face_gradient(V, grid);
    const Field sigma = power_flux(Field(dV / Jf), prm.q, prm.eps_reg);
    const Field work = face_to_node_density(Field((sigma - Pf) * dV), grid);
    const Field temp_src = work / J0 + 0.5 * rho0 * (V - state.v).square() / dt + f_temp;
    const auto temp = implicit_power_diffusion_step(rho0, state.Theta, prm.p, prm.eps_reg, J, J0, temp_src,
                                                    dt, grid, cfg, &T_lag);
    Theta_new = temp.w;

    rep.picard_iters = k;
    rep.newton_iters_momentum += mom.newton_iters;
    rep.newton_iters_temperature += temp.newton_iters;
    rep.boundary_work = dt * (V(0) * P(0) - V(n - 1) * P(n - 1));
    rep.boundary_impulse = dt * (P(0) - P(n - 1));

    const double diff = std::max((V - V_lag).abs().maxCoeff(), (Theta_new - T_lag).abs().maxCoeff());
    const double scale = std::max(V.abs().maxCoeff(), Theta_new.abs().maxCoeff());
    if (prev_diff > 0.0) rep.contraction_ratios.push_back(diff / prev_diff);
    prev_diff = diff;
    V_lag = V;
    T_lag = Theta_new;
    if (diff <= cfg.picard_tol * scale) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonContraction("fixed-point map did not contract within " + std::to_string(cfg.picard_max) +
                             " iterations at t = " + num(t_new) + "; reduce dt",
                         t_new);

  State next;
  next.t = t_new;
  next.J = update_jacobian(state.J, 0.5 * (state.v + V), dt, grid, cfg.J_floor);
  next.rho = density_from_jacobian(next.J, J0, rho0);
  next.v = std::move(V);
  next.Theta = std::move(Theta_new);
  rep.inf_J = next.J.minCoeff();
  rep.sup_J = next.J.maxCoeff();
  rep.theta_min = next.Theta.minCoeff();
  return {std::move(next), std::move(rep)};
}

namespace {

std::pair<State, StepReport> advance(const State& s, const InitialData& init, double dt,
                                     const SolverConfig& cfg, const FluidParams& prm,
                                     const Forcing* forcing, int halvings) {
  try {
    auto out = picard_step(s, init, dt, cfg, prm, forcing);
    out.second.halvings = halvings;
    return out;
  } catch (const NonContraction&) {
    if (halvings >= cfg.max_halvings) throw;
  } catch (const NewtonFailure&) {
    if (halvings >= cfg.max_halvings) throw;
  }
  auto first = advance(s, init, 0.5 * dt, cfg, prm, forcing, halvings + 1);
  auto second = advance(first.first, init, 0.5 * dt, cfg, prm, forcing, halvings + 1);
  second.first.t = s.t + dt;
  return {std::move(second.first), merge_reports(first.second, second.second)};
}

}  // namespace

Trajectory run_from(const State& start, const InitialData& init, const SolverConfig& cfg,
                    const FluidParams& prm, double t_end, const Forcing* forcing, int record_every) {
  const auto report = validate_params(prm);
  if (!report.valid()) throw DomainError("run: invalid parameters: " + report.summary());
  if (!(cfg.dt > 0.0)) throw DomainError("run: dt must be positive");
  if (!(t_end >= start.t)) throw DomainError("run: t_end precedes the start time");
  if (record_every < 1) record_every = 1;

  Trajectory traj;
  traj.snapshots.push_back(start);
  traj.boundary_work.push_back(0.0);
  traj.boundary_impulse.push_back(0.0);
  // Uniform steps no longer than cfg.dt that land exactly on t_end.
  const double span = t_end - start.t;
  const auto steps = static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
  const double dt = steps > 0 ? span / static_cast<double>(steps) : 0.0;
  State cur = start;
  double work = 0.0, impulse = 0.0;
  StepReport pending;
  bool have_pending = false;
  for (long k = 1; k <= steps; ++k) {
    const double t_target = k == steps ? t_end : start.t + static_cast<double>(k) * dt;
    try {
      auto [next, rep] = advance(cur, init, t_target - cur.t, cfg, prm, forcing, 0);
      next.t = t_target;
      work += rep.boundary_work;
      impulse += rep.boundary_impulse;
      cur = std::move(next);
      pending = have_pending ? merge_reports(pending, rep) : rep;
      have_pending = true;
    } catch (const JacobianDegeneracy& e) {
      traj.failure = RunFailure{"degeneracy", e.what(), t_target};
      return traj;
    } catch (const NonContraction& e) {
      traj.failure = RunFailure{"non_contraction", e.what(), t_target};
      return traj;
    } catch (const NewtonFailure& e) {
      traj.failure = RunFailure{"newton", e.what(), t_target};
      return traj;
    }
    if (k % record_every == 0 || k == steps) {
      traj.snapshots.push_back(cur);
      traj.reports.push_back(pending);
      traj.boundary_work.push_back(work);
      traj.boundary_impulse.push_back(impulse);
      have_pending = false;
    }
  }
  return traj;
}

Trajectory run(const InitialData& init, const SolverConfig& cfg, const FluidParams& prm, double t_end,
               const Forcing* forcing, int record_every) {
  if (!(t_end >= 0.0)) throw DomainError("run: t_end must be nonnegative");
  return run_from(initial_state(init), init, cfg, prm, t_end, forcing, record_every);
}

InitialData apply_density_floor(const InitialData& init, double eps) {
  if (eps == 0.0) return init;
  if (!(eps > 0.0)) throw DomainError("density floor must be nonnegative");
  InitialData out = init;
  out.rho0 = init.rho0 + eps;
  out.rho_bar = std::max(1.0, out.rho0.maxCoeff());
  return out;
}

}  // namespace lagflow
