#include "lagflow/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lagflow/quadrature.hpp"

namespace lagflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Field second_derivative(const Field& f, const Grid& grid) { return ddy(ddy(f, grid), grid); }

}  // namespace

EnergyReport energy_functional(const State& s, const InitialData& init, const FluidParams& prm,
                               J0Weighting weighting) {
  const Grid& g = init.grid;
  require_length(s.v, g, "energy_functional");
  const Field& rho0 = init.rho0;
  const double a = prm.alpha;
  const Field one = Field::Ones(g.N);
  const Field v_y = ddy(s.v, g);
  const Field T_y = ddy(s.Theta, g);
  const Field J_y = ddy(s.J, g);
  const Field J0_factor = (weighting == J0Weighting::divide_by_J0) ? Field(1.0 / init.J0) : one;

  EnergyReport r;
  r.t = s.t;
  r.components[0] = weighted_integral(s.v.square(), rho0, a + 1.0, one, g);
  r.components[1] = weighted_integral(s.Theta, rho0, a + 1.0, one, g);
  r.components[2] = weighted_integral(s.Theta.square(), rho0, a + 2.0, one, g);
  r.components[3] = weighted_integral(v_y.square(), rho0, a + 1.0, one, g);
  r.components[4] = weighted_integral(T_y.square(), rho0, a + 1.0, one, g);
  r.components[5] = weighted_integral((v_y / s.J).abs().pow(prm.q) * s.J, rho0, a, J0_factor, g);
  r.components[6] = weighted_integral((T_y / s.J).abs().pow(prm.p) * s.J, rho0, a + 2.0, J0_factor, g);
  r.components[7] = weighted_integral(J_y.square(), rho0, a, one, g);
  r.theta_flux_alpha_weight = weighted_integral((T_y / s.J).abs().pow(prm.p) * s.J, rho0, a, one, g);
  r.E = 0.0;
  for (double c : r.components) r.E += c;
  return r;
}

double dissipation_functional(const State& s, const State& prev, const InitialData& init, const FluidParams& prm) {
  const Grid& g = init.grid;
  const double dt = s.t - prev.t;
  if (!(std::abs(dt) > 0.0)) throw DomainError("dissipation_functional: needs two snapshots at distinct times");
  const Field& rho0 = init.rho0;
  // The |s|^{r-2} factors are singular at s = 0 for r < 2; use the solver's smoothing.
  const double eps = prm.eps_reg > 0.0 ? prm.eps_reg : 1e-12;

  const Field v_y = ddy(s.v, g), T_y = ddy(s.Theta, g);
  const Field v_yy = second_derivative(s.v, g), T_yy = second_derivative(s.Theta, g);
  const Field sv = v_y / s.J, sT = T_y / s.J;
  const Field v_t = (s.v - prev.v) / dt, T_t = (s.Theta - prev.Theta) / dt;

  const auto reg = [eps](const Field& x, double r) { return (x.square() + eps * eps).pow(0.5 * (r - 2.0)); };

  const Field integrand = sv.abs().pow(prm.q) * s.J + rho0 * sT.abs().pow(prm.p) * s.J +
                          reg(sv, prm.q) * v_yy.square() / s.J + reg(sT, prm.p) * T_yy.square() / s.J +
                          rho0.cube() * T_t.square() + rho0 * v_t.square();
  return weighted_integral(integrand, rho0, prm.alpha, Field::Ones(g.N), g);
}

double total_energy(const State& s, const InitialData& init) {
  return integrate(init.J0 * init.rho0 * (0.5 * s.v.square() + s.Theta), init.grid);
}

double total_momentum(const State& s, const InitialData& init) {
  return integrate(init.J0 * init.rho0 * s.v, init.grid);
}

double admissibility_margin(double H, double t, double q) {
  const double k = (q + 1.0) / (q - 1.0);
  return k * std::pow(H, k) * t;
}

double BoundEnvelope::margin_at(double time) const { return admissibility_margin(H0_at(time), time, q); }

std::array<double, 8> initial_weighted_norms(const InitialData& init, const FluidParams& prm) {
  const Grid& g = init.grid;
  const Field& rho0 = init.rho0;
  const double a = prm.alpha;
  const Field one = Field::Ones(g.N);
  const Field dv = ddy(init.v0, g), dT = ddy(init.Theta0, g), dJ = ddy(init.J0, g);
  std::array<double, 8> n{};
  n[0] = weighted_integral(init.v0.square(), rho0, a + 2.0, one, g);
  n[1] = weighted_integral(init.Theta0.abs(), rho0, a + 1.0, one, g);
  n[2] = weighted_integral(init.Theta0.square(), rho0, a + 2.0, one, g);
  n[3] = weighted_integral(dv.square(), rho0, a + 1.0, one, g);
  n[4] = weighted_integral(dT.square(), rho0, a + 1.0, one, g);
  n[5] = weighted_integral((dv / init.J0).abs().pow(prm.q) * init.J0, rho0, a, one, g);
  n[6] = weighted_integral((dT / init.J0).abs().pow(prm.p) * init.J0, rho0, a + 2.0, one, g);
  n[7] = weighted_integral(dJ.square(), rho0, a, one, g);
  return n;
}

double compute_G0(const InitialData& init, const FluidParams& prm, const EnvelopeOptions& opt) {
  const double q = prm.q, a = prm.alpha, C = opt.generic_C;
  const double rho_bar = init.rho_bar;
  const double tail = C * std::pow(rho_bar, -(2.0 * a + 1.0) / (2.0 * (q + 1.0)));
  if (q >= 2.0) return tail;  // the first term's exponents are singular at q = 2

  const Field w = init.rho0.pow(a);
  const Field dw = ddy(w, init.grid);
  const double Lp = std::pow(integrate(dw.abs().pow(prm.p), init.grid), 1.0 / prm.p);
  const double Linf = dw.abs().maxCoeff();
  const bool sixteen = opt.g0 == G0Variant::sixteen_q;
  const double norm_exp = (sixteen ? 16.0 : 4.0) * q / (2.0 - q);
  const double rho_exp = -std::min(((3.0 * q - 2.0) * a + q) / (2.0 - q), (sixteen ? 10.0 : 8.0) * a / (q - 1.0));
  const double head = C * std::pow(init.J_hi, 12.0) * std::pow(1.0 / init.J_lo, 12.0 * q / (2.0 - q)) *
                      std::pow(rho_bar, rho_exp) * std::pow(Lp * Linf, norm_exp);
  return head + tail;
}

BoundEnvelope bound_envelope(const InitialData& init, const FluidParams& prm, const std::vector<double>& t_grid,
                             const EnvelopeOptions& opt) {
  if (t_grid.empty()) throw DomainError("bound_envelope: empty time grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw DomainError("bound_envelope: time grid must be sorted");
  BoundEnvelope env;
  env.t = t_grid;
  env.q = prm.q;
  env.options = opt;
  env.initial_norms = initial_weighted_norms(init, prm);
  env.H0_initial = 0.0;
  for (double x : env.initial_norms) env.H0_initial += x;
  env.G0 = compute_G0(init, prm, opt);
  env.note = "generic constants C set to " + std::to_string(opt.generic_C) + "; audits calibrate at the first snapshot";

  if (env.margin_at(t_grid.front()) >= 1.0)
    throw DomainError("bound_envelope: admissibility margin >= 1 at the first time; envelope undefined");

  const double q = prm.q, C = opt.generic_C;
  const double kappa = (opt.m0 == M0Exponent::statement) ? 2.0 * q / (q - 1.0) : 2.0 * q / (q + 1.0);
  const double rho_bar = init.rho_bar;
  const double grow = std::pow(rho_bar, -prm.alpha / q);

  const auto m0_integrand = [&](double s) {
    const double m = env.margin_at(s);
    return std::pow(env.H0_at(s), 2.0 * q / (q - 1.0)) * std::pow(1.0 - m, -kappa);
  };
  const auto M0 = [&](double t) {
    return C / q * (q * init.J_hi + env.H0_at(t) + adaptive_simpson(m0_integrand, 0.0, t, 1e-13));
  };
  const auto F0 = [&](double t) {
    return std::pow(rho_bar, -prm.alpha / (q - 1.0)) * std::pow(M0(t), -(q + 1.0) / (q - 1.0)) *
           std::exp(-(q + 1.0) / q * grow * t);
  };

  double F_cum = 0.0, t_prev = 0.0;
  bool alive = true;
  for (double t : t_grid) {
    const double m = env.margin_at(t);
    env.H0.push_back(env.H0_at(t));
    env.margin.push_back(m);
    if (!alive || m >= 1.0) {
      alive = false;
      env.M0.push_back(kNaN);
      env.F0.push_back(kNaN);
      env.F0_integral.push_back(kNaN);
      continue;
    }
    F_cum += adaptive_simpson(F0, t_prev, t, 1e-13, 30);
    t_prev = t;
    env.M0.push_back(M0(t));
    env.F0.push_back(F0(t));
    env.F0_integral.push_back(F_cum);
  }
  return env;
}

BoundAudit check_bounds(const std::vector<State>& snaps, const BoundEnvelope& env, const InitialData& init,
                        const FluidParams& prm, double slack) {
  if (snaps.empty()) throw DomainError("check_bounds: empty trajectory");
  BoundAudit audit;
  audit.slack = slack;
  audit.note = env.note;
  const double q = prm.q, C = env.options.generic_C;
  const double grow = std::pow(init.rho_bar, -prm.alpha / q);

  std::size_t k_env = 0;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const State& s = snaps[k];
    while (k_env < env.t.size() && env.t[k_env] < s.t - 1e-12 * std::max(1.0, std::abs(s.t))) ++k_env;
    if (k_env >= env.t.size() || std::abs(env.t[k_env] - s.t) > 1e-12 * std::max(1.0, std::abs(s.t)))
      throw DomainError("check_bounds: envelope is not sampled at snapshot time " + std::to_string(s.t));

    SnapshotAudit row;
    row.t = s.t;
    row.inf_J = s.J.minCoeff();
    row.sup_J = s.J.maxCoeff();
    row.margin = env.margin[k_env];
    row.E = energy_functional(s, init, prm).E;
    row.in_scope = row.margin < 1.0 && std::isfinite(env.M0[k_env]);
    if (!(row.inf_J > 0.0)) {
      row.passed = false;
      row.failed = "inf_J";
    }
    if (row.in_scope) {
      const double M0 = env.M0[k_env];
      row.ratio_E = row.E / (env.H0[k_env] * std::pow(1.0 - row.margin, -(q - 1.0) / (q + 1.0)));
      row.ratio_supJ = row.sup_J / (2.0 * M0 * std::exp(grow * (q - 1.0) / q * s.t));
      const double bracket = 1.0 + C * init.J_lo * std::pow(q * std::max(M0 - init.J_hi, 0.0), 1.0 / q) *
                                       std::pow(env.F0_integral[k_env], (q - 1.0) / q);
      row.ratio_infJ = (init.J_lo / bracket) / row.inf_J;
      const Field upper = init.rho0 * (init.J_hi / init.J_lo) * bracket;
      const Field lower = 0.5 * init.rho0 * init.J_lo / M0 * std::exp(-grow * (q - 1.0) / q * s.t);
      row.ratio_rho_hi = (s.rho / upper).maxCoeff();
      row.ratio_rho_lo = (lower / s.rho).maxCoeff();
    }
    audit.rows.push_back(row);
  }

  const SnapshotAudit& first = audit.rows.front();
  audit.calibration = {first.ratio_E, first.ratio_supJ, first.ratio_infJ, first.ratio_rho_hi, first.ratio_rho_lo};
  static const char* names[5] = {"ratio_E", "ratio_supJ", "ratio_infJ", "ratio_rho_hi", "ratio_rho_lo"};
  for (auto& row : audit.rows) {
    if (row.in_scope) {
      const double vals[5] = {row.ratio_E, row.ratio_supJ, row.ratio_infJ, row.ratio_rho_hi, row.ratio_rho_lo};
      for (int m = 0; m < 5; ++m) {
        const double limit = audit.calibration[m] * (1.0 + slack) + 1e-300;
        if (!(vals[m] <= limit)) {
          row.passed = false;
          if (!row.failed.empty()) row.failed += ",";
          row.failed += names[m];
        }
      }
    }
    if (!row.passed && audit.passed) {
      audit.passed = false;
      audit.first_failure_time = row.t;
    }
  }
  return audit;
}

BoundAudit check_bounds(const std::vector<State>& snaps, const InitialData& init, const FluidParams& prm,
                        const EnvelopeOptions& options, double slack) {
  std::vector<double> times;
  times.reserve(snaps.size());
  for (const auto& s : snaps) times.push_back(s.t);
  return check_bounds(snaps, bound_envelope(init, prm, times, options), init, prm, slack);
}

}  // namespace lagflow
