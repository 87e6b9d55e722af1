#include "lagflow/verify.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lagflow/energetics.hpp"

namespace lagflow {

ExactFields trig_family(const TrigFamily& sp) {
  if (!(sp.r_trunc > 0.0)) throw DomainError("trig_family: r_trunc must be positive");
  if (!(std::abs(sp.rho_amp) < 1.0)) throw DomainError("trig_family: |rho_amp| must be below 1");
  const double k = std::numbers::pi / sp.r_trunc;
  const double b = sp.b, c0 = sp.c0, tb = sp.theta_bar, a = sp.rho_amp;
  ExactFields f;
  f.name = "trig";
  f.v = [=](double y, double t) { return -b * std::exp(t) / k * std::cos(k * y); };
  f.v_t = f.v;
  f.v_y = [=](double y, double t) { return b * std::exp(t) * std::sin(k * y); };
  f.J = [=](double y, double t) { return 1.0 + b * std::expm1(t) * std::sin(k * y); };
  f.J_t = f.v_y;
  f.J_y = [=](double y, double t) { return b * std::expm1(t) * k * std::cos(k * y); };
  f.Theta = [=](double y, double t) { return tb + c0 * std::exp(-t) * std::cos(k * y); };
  f.Theta_t = [=](double y, double t) { return -c0 * std::exp(-t) * std::cos(k * y); };
  f.Theta_y = [=](double y, double t) { return -c0 * std::exp(-t) * k * std::sin(k * y); };
  f.rho0 = [=](double y) { return 1.0 + a * std::cos(k * y); };
  f.rho0_y = [=](double y) { return -a * k * std::sin(k * y); };
  return f;
}

ExactFields steady_state_family(double theta_bar, double rho_uniform) {
  if (!(rho_uniform > 0.0)) throw DomainError("steady_state_family: density must be positive");
  ExactFields f;
  f.name = "steady";
  const auto zero = [](double, double) { return 0.0; };
  f.v = f.v_t = f.v_y = zero;
  f.J = [](double, double) { return 1.0; };
  f.J_t = f.J_y = zero;
  f.Theta = [theta_bar](double, double) { return theta_bar; };
  f.Theta_t = f.Theta_y = zero;
  f.rho0 = [rho_uniform](double) { return rho_uniform; };
  f.rho0_y = [](double) { return 0.0; };
  return f;
}

namespace {

Field sample(const ExactFields::Fn& fn, const Grid& g, double t) {
  Field out(g.N);
  for (Eigen::Index i = 0; i < g.N; ++i) out(i) = fn(g.nodes(i), t);
  return out;
}

Field sample0(const std::function<double(double)>& fn, const Grid& g) {
  Field out(g.N);
  for (Eigen::Index i = 0; i < g.N; ++i) out(i) = fn(g.nodes(i));
  return out;
}

}  // namespace

double compatibility_residual(const ExactFields& f, const Grid& g, const std::vector<double>& times) {
  double res = 0.0;
  for (double t : times) res = std::max(res, (sample(f.J_t, g, t) - sample(f.v_y, g, t)).abs().maxCoeff());
  return res;
}

Forcing manufactured_forcing(const ExactFields& f, const FluidParams& prm, const Grid& g) {
  const Eigen::Index n = g.N;
  const Field rho0 = sample0(f.rho0, g);
  const Field rho0_y = sample0(f.rho0_y, g);
  const Field J0 = sample(f.J, g, 0.0);
  const Field J0_y = sample(f.J_y, g, 0.0);
  const Field omega = trapezoid_weights(g);
  const double q = prm.q, p = prm.p, eps = prm.eps_reg, R = prm.R;

  // Control-volume edges: the two domain ends and the midpoints between nodes.
  Field edges(n + 1);
  edges(0) = g.nodes(0);
  edges(n) = g.nodes(n - 1);
  edges.segment(1, n - 1) = 0.5 * (g.nodes.head(n - 1) + g.nodes.tail(n - 1));

  // Cell average of (flux(y))_y, exact for any flux however steep its profile.
  const auto divergence = [=](const std::function<double(double)>& flux) {
    Field F(n + 1);
    for (Eigen::Index k = 0; k <= n; ++k) F(k) = flux(edges(k));
    return Field((F.tail(n) - F.head(n)) / omega);
  };

  // rho = J0 rho0 / J and its y-derivative by the quotient rule.
  const auto density = [=](const Field& J, const Field& J_y) {
    const Field m = J0 * rho0;
    const Field m_y = J0_y * rho0 + J0 * rho0_y;
    return std::pair<Field, Field>{m / J, (m_y * J - m * J_y) / J.square()};
  };

  Forcing out;
  out.momentum = [=](double t) {
    const Field J = sample(f.J, g, t), J_y = sample(f.J_y, g, t);
    const Field v_t = sample(f.v_t, g, t);
    const Field Th = sample(f.Theta, g, t), Th_y = sample(f.Theta_y, g, t);
    const auto [rho, rho_y] = density(J, J_y);
    const Field stress_y = divergence([&](double y) { return power_flux(f.v_y(y, t) / f.J(y, t), q, eps); });
    const Field pressure_y = R * (rho_y * Th + rho * Th_y);
    return Field(rho0 * v_t - (stress_y - pressure_y) / J0);
  };
  out.temperature = [=](double t) {
    const Field J = sample(f.J, g, t), J_y = sample(f.J_y, g, t);
    const Field v_y = sample(f.v_y, g, t);
    const Field Th = sample(f.Theta, g, t), Th_t = sample(f.Theta_t, g, t);
    const Field rho = density(J, J_y).first;
    const Field heat_y = divergence([&](double y) { return power_flux(f.Theta_y(y, t) / f.J(y, t), p, eps); });
    const Field heating = power_flux(Field(v_y / J), q, eps) * v_y;
    return Field(rho0 * Th_t - heat_y / J0 + R * rho * Th * v_y / J0 - heating / J0);
  };
  return out;
}

InitialData manufactured_initial_data(const ExactFields& f, const Grid& g) {
  DensityProfile prof;
  prof.kind = ProfileKind::custom;
  return make_initial_data(g, sample0(f.rho0, g), sample(f.J, g, 0.0), sample(f.v, g, 0.0),
                           sample(f.Theta, g, 0.0), prof);
}

double ConvergenceTable::min_order() const {
  if (orders.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(orders.begin(), orders.end());
}

ConvergenceTable mms_convergence(const MmsStudy& st) {
  ConvergenceTable tab;
  tab.label = st.fields.name + (st.kind == Refinement::space ? " space" : " time");

  const long N_check = st.kind == Refinement::space ? st.N_values.back() : st.N_fixed;
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(st.t_end * k / 10.0);
  tab.compatibility_residual = compatibility_residual(st.fields, build_grid(st.r_trunc, N_check), times);
  if (tab.compatibility_residual > 1e-12)
    throw DomainError("mms_convergence: exact fields violate J_t = v_y (residual " +
                      std::to_string(tab.compatibility_residual) + ")");

  const auto solve = [&](long N, double dt) {
    const Grid g = build_grid(st.r_trunc, N);
    const InitialData init = manufactured_initial_data(st.fields, g);
    const Forcing forcing = manufactured_forcing(st.fields, st.params, g);
    SolverConfig cfg = st.solver;
    cfg.dt = dt;
    const Trajectory tr = run(init, cfg, st.params, st.t_end, &forcing, std::numeric_limits<int>::max());
    if (!tr.ok()) throw DomainError("mms_convergence: solver failed: " + tr.failure->message);
    const State& s = tr.snapshots.back();
    ConvergenceRow row;
    row.N = N;
    row.dt = dt;
    row.err_v = (s.v - sample(st.fields.v, g, s.t)).abs().maxCoeff();
    row.err_Theta = (s.Theta - sample(st.fields.Theta, g, s.t)).abs().maxCoeff();
    row.err_J = (s.J - sample(st.fields.J, g, s.t)).abs().maxCoeff();
    row.err = std::max({row.err_v, row.err_Theta, row.err_J});
    return row;
  };

  std::vector<double> widths;
  if (st.kind == Refinement::space) {
    for (long N : st.N_values) {
      const double h = 2.0 * st.r_trunc / static_cast<double>(N - 1);
      tab.rows.push_back(solve(N, st.dt_per_h2 * h * h));
      widths.push_back(h);
    }
  } else {
    for (double dt : st.dt_values) {
      tab.rows.push_back(solve(st.N_fixed, dt));
      widths.push_back(dt);
    }
  }
  for (std::size_t k = 0; k + 1 < tab.rows.size(); ++k)
    tab.orders.push_back(std::log(tab.rows[k].err / tab.rows[k + 1].err) / std::log(widths[k] / widths[k + 1]));
  return tab;
}

AuditReport conservation_audit(const Trajectory& tr, const InitialData& init, const FluidParams&, double tol_neg) {
  AuditReport rep;
  if (tr.snapshots.empty()) return rep;
  const Grid& g = init.grid;
  const Field m0 = init.J0 * init.rho0;
  const double m_scale = m0.maxCoeff();
  const State& first = tr.snapshots.front();
  const double E0 = total_energy(first, init);
  const double M0 = total_momentum(first, init);
  rep.theta_min = first.Theta.minCoeff();
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const State& s = tr.snapshots[k];
    const double mass = (s.J * s.rho - m0).abs().maxCoeff() / m_scale;
    const double W = k < tr.boundary_work.size() ? tr.boundary_work[k] : 0.0;
    const double I = k < tr.boundary_impulse.size() ? tr.boundary_impulse[k] : 0.0;
    const double drift = std::abs(total_energy(s, init) - E0 - W) / std::abs(E0);
    rep.mass_residual_t.push_back(mass);
    rep.energy_drift_t.push_back(drift);
    rep.mass_residual = std::max(rep.mass_residual, mass);
    rep.energy_drift = std::max(rep.energy_drift, drift);
    rep.momentum_drift = std::max(rep.momentum_drift, std::abs(total_momentum(s, init) - M0 - I));
    rep.theta_min = std::min(rep.theta_min, s.Theta.minCoeff());
    rep.theta_negative_nodes += static_cast<long>((s.Theta < -tol_neg).count());
    rep.theta_negative_mass = std::max(rep.theta_negative_mass, integrate(Field((-s.Theta).max(0.0)), g));
  }
  const double elapsed = tr.snapshots.back().t - first.t;
  rep.energy_drift_rate = elapsed > 0.0 ? rep.energy_drift / elapsed : 0.0;
  return rep;
}

namespace {

double holder_ratio(double a, double b, double r) {
  return std::abs(power_flux(a, r, 0.0) - power_flux(b, r, 0.0)) / std::pow(std::abs(a - b), r - 1.0);
}

}  // namespace

double interpolation_ratio(double p, double l, double omega, long N) {
  if (!(l + 2.0 > 0.0) || !(p < l + 1.5) || !(p >= 1.0))
    throw DomainError("interpolation_ratio: needs l + 2 > 0, 1 <= p < l + 3/2");
  const Grid g = build_grid(1.0, N);
  Field d1(g.N), d2(g.N);
  for (Eigen::Index i = 0; i < g.N; ++i) {
    const double x = g.nodes(i), w = 1.0 - x * x;
    const double u = std::pow(w, 4), u1 = -8.0 * x * std::pow(w, 3), u2 = -8.0 * std::pow(w, 3) + 48.0 * x * x * w * w;
    const double c = std::cos(omega * x), c1 = -omega * std::sin(omega * x), c2 = -omega * omega * c;
    d1(i) = u1 * c + u * c1;
    d2(i) = u2 * c + 2.0 * u1 * c1 + u * c2;
  }
  const double sup = d1.abs().maxCoeff();
  const double I1 = integrate(Field(d1.abs().pow(2.0 * (l - p + 2.0))), g);
  const double I2 = integrate(Field(d1.abs().pow(2.0 * (p - 1.0)) * d2.square()), g);
  return sup / std::pow(I1 * I2, 1.0 / (2.0 * (l + 2.0)));
}

OracleReport inequality_oracles(std::uint64_t seed, long samples, const std::vector<double>& r_values) {
  if (samples < 1) throw DomainError("inequality_oracles: samples must be positive");
  OracleReport rep;
  rep.seed = seed;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> decades(-6.0, 6.0);
  std::bernoulli_distribution coin(0.5);
  // Half the pairs are O(1), half spread over twelve decades.
  const auto draw = [&]() {
    if (coin(gen)) return 10.0 * unit(gen);
    const double mag = std::pow(10.0, decades(gen));
    return coin(gen) ? mag : -mag;
  };
  const double lambdas[] = {1e-3, 1.0, 1e3};

  for (double r : r_values) {
    if (!(r > 1.0 && r < 2.0)) throw DomainError("inequality_oracles: r must lie in (1,2)");
    MonotonicityRow row;
    row.r = r;
    row.samples = samples;
    for (long k = 0; k < samples; ++k) {
      const double a = draw(), b = draw();
      if (a == b) continue;
      const double prod = (power_flux(a, r, 0.0) - power_flux(b, r, 0.0)) * (a - b);
      if (prod < 0.0) ++row.violations;
      const double base = holder_ratio(a, b, r);
      row.max_holder_ratio = std::max(row.max_holder_ratio, base);
      for (double lam : lambdas) {
        const double scaled = holder_ratio(lam * a, lam * b, r);
        row.max_scale_residual = std::max(row.max_scale_residual, std::abs(scaled / base - 1.0));
      }
      row.identity_residual =
          std::max(row.identity_residual, std::abs(std::abs(power_flux(a, r, 0.0)) / std::pow(std::abs(a), r - 1.0) - 1.0));
    }
    rep.monotonicity.push_back(row);
  }

  const double pl[][2] = {{1.5, 1.0}, {1.2, 0.5}, {1.8, 2.0}};
  const double omegas[] = {0.0, 1.0, 2.0, 4.0};
  const long N = 2001;
  for (const auto& c : pl) {
    InterpolationRow row;
    row.p = c[0];
    row.l = c[1];
    row.N = N;
    for (double w : omegas) {
      row.ratio = std::max(row.ratio, interpolation_ratio(c[0], c[1], w, N));
      row.ratio_refined = std::max(row.ratio_refined, interpolation_ratio(c[0], c[1], w, 2 * N - 1));
    }
    row.relative_change = std::abs(row.ratio_refined / row.ratio - 1.0);
    rep.interpolation.push_back(row);
  }
  return rep;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Reference for q = p = 2: every sub-problem is linear and assembled directly
// as a sparse system from face flux differences.
struct LinearReference {
  const InitialData& init;
  const FluidParams& prm;
  const SolverConfig& cfg;
  Eigen::Index n;
  double h;
  Vec omega;
  SpMat D;  // nodal derivative

  LinearReference(const InitialData& i, const FluidParams& p, const SolverConfig& c)
      : init(i), prm(p), cfg(c), n(i.grid.N), h(i.grid.h), omega(n), D(n, n) {
    omega.setConstant(h);
    omega(0) = omega(n - 1) = 0.5 * h;
    std::vector<Eigen::Triplet<double>> t;
    const double s = 1.0 / (2.0 * h);
    t.emplace_back(0, 0, -3.0 * s);
    t.emplace_back(0, 1, 4.0 * s);
    t.emplace_back(0, 2, -1.0 * s);
    for (Eigen::Index k = 1; k < n - 1; ++k) {
      t.emplace_back(k, k - 1, -s);
      t.emplace_back(k, k + 1, s);
    }
    t.emplace_back(n - 1, n - 1, 3.0 * s);
    t.emplace_back(n - 1, n - 2, -4.0 * s);
    t.emplace_back(n - 1, n - 3, 1.0 * s);
    D.setFromTriplets(t.begin(), t.end());
  }

  // Solves  omega J0 rho0 (w - w_old)/dt - [c_{i+1/2}(w_{i+1} - w_i) - c_{i-1/2}(w_i - w_{i-1})] = rhs
  // with c = 1/(h Jf).
  Vec diffuse(const Vec& w_old, const Vec& Jf, const Vec& rhs, double dt) const {
    const Vec mass = omega.cwiseProduct(init.J0.matrix()).cwiseProduct(init.rho0.matrix()) / dt;
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, mass(i));
    for (Eigen::Index f = 0; f < n - 1; ++f) {
      const double c = 1.0 / (h * Jf(f));
      t.emplace_back(f, f, c);
      t.emplace_back(f, f + 1, -c);
      t.emplace_back(f + 1, f + 1, c);
      t.emplace_back(f + 1, f, -c);
    }
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw DomainError("reduction_check: reference factorization failed");
    return lu.solve(Vec(mass.cwiseProduct(w_old) + rhs));
  }

  State step(const State& s, double dt) const {
    const Vec v = s.v.matrix(), Th = s.Theta.matrix(), J_old = s.J.matrix();
    const Vec m = init.J0.matrix().cwiseProduct(init.rho0.matrix());
    Vec V_lag = v, T_lag = Th, V, T;
    bool converged = false;
    for (int k = 1; k <= cfg.picard_max && !converged; ++k) {
      const Vec J = J_old + dt * (D * (0.5 * (v + V_lag)));
      const Vec rho = m.cwiseQuotient(J);
      const Vec P = prm.R * rho.cwiseProduct(T_lag);
      Vec Jf(n - 1), Pf(n - 1);
      for (Eigen::Index f = 0; f < n - 1; ++f) {
        Jf(f) = 0.5 * (J(f) + J(f + 1));
        Pf(f) = 0.5 * (P(f) + P(f + 1));
      }
      // Pressure enters as a flux difference, with the node value at each end.
      Vec mom_rhs = Vec::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double right = i < n - 1 ? Pf(i) : P(n - 1);
        const double left = i > 0 ? Pf(i - 1) : P(0);
        mom_rhs(i) = -(right - left);
      }
      V = diffuse(v, Jf, mom_rhs, dt);

      Vec heat = Vec::Zero(n);
      for (Eigen::Index f = 0; f < n - 1; ++f) {
        const double dV = V(f + 1) - V(f);
        const double w = ((dV / h) / Jf(f) - Pf(f)) * dV;
        heat(f) += 0.5 * w;
        heat(f + 1) += 0.5 * w;
      }
      // Kinetic energy removed by the implicit momentum step, returned as heat.
      const Vec kinetic = 0.5 * omega.cwiseProduct(m).cwiseProduct((V - v).cwiseAbs2()) / dt;
      T = diffuse(Th, Jf, Vec(heat + kinetic), dt);

      const double diff = std::max((V - V_lag).cwiseAbs().maxCoeff(), (T - T_lag).cwiseAbs().maxCoeff());
      const double scale = std::max(V.cwiseAbs().maxCoeff(), T.cwiseAbs().maxCoeff());
      converged = diff <= cfg.picard_tol * scale;
      V_lag = V;
      T_lag = T;
    }
    if (!converged) throw NonContraction("reduction_check: reference fixed point did not converge", s.t + dt);
    State out;
    out.t = s.t + dt;
    out.J = (J_old + dt * (D * (0.5 * (v + V)))).array();
    out.rho = m.array() / out.J;
    out.v = V.array();
    out.Theta = T.array();
    return out;
  }
};

}  // namespace

ReductionReport reduction_check(const FluidParams& prm, const InitialData& init, const SolverConfig& cfg, int steps) {
  if (prm.strict_mode) throw DomainError("reduction_check: requires non-strict mode (q = p = 2)");
  if (prm.q != 2.0 || prm.p != 2.0) throw DomainError("reduction_check: requires q = p = 2");
  if (prm.eps_reg != 0.0) throw DomainError("reduction_check: requires eps_reg = 0");
  if (steps < 1) throw DomainError("reduction_check: steps must be positive");

  const LinearReference ref(init, prm, cfg);
  ReductionReport rep;
  rep.steps = steps;
  State a = initial_state(init), b = a;
  for (int k = 0; k < steps; ++k) {
    a = picard_step(a, init, cfg.dt, cfg, prm).first;
    b = ref.step(b, cfg.dt);
    const double d = std::max({(a.v - b.v).abs().maxCoeff(), (a.Theta - b.Theta).abs().maxCoeff(),
                               (a.J - b.J).abs().maxCoeff()});
    rep.discrepancy.push_back(d);
    rep.max_discrepancy = std::max(rep.max_discrepancy, d);
  }
  return rep;
}

}  // namespace lagflow
