#include "lagflow/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lagflow/energetics.hpp"
#include "lagflow/quadrature.hpp"

namespace lagflow {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void require_q(double q, const char* what) {
  if (!(q > 1.0 && q < 2.0)) throw DomainError(std::string(what) + ": q must lie in (1,2)");
}

double eta_power(double q) { return (q - 1.0) * (q - 1.0) / (2.0 * (q + 1.0)); }

}  // namespace

double local_gronwall_bound(double f0, const std::function<double(double)>& h_fn, double c0, double sigma,
                            double T0, double t) {
  if (!(t >= T0)) throw DomainError("local_gronwall_bound: t must not precede T0");
  if (!(sigma > 0.0)) throw DomainError("local_gronwall_bound: sigma must be positive");
  if (!(c0 >= 0.0)) throw DomainError("local_gronwall_bound: c0 must be nonnegative");
  if (!(f0 >= 0.0)) throw DomainError("local_gronwall_bound: f0 must be nonnegative");

  const auto H = [&](double s) { return h_fn ? f0 + adaptive_simpson(h_fn, T0, s, 1e-14) : f0; };
  const auto margin = [&](double s) { return sigma * c0 * std::pow(H(s), sigma) * (s - T0); };

  const double Ht = H(t);
  const double x = sigma * c0 * std::pow(Ht, sigma) * (t - T0);
  if (x >= 1.0) {
    double crit;
    if (!h_fn) {
      crit = T0 + 1.0 / (sigma * c0 * std::pow(f0, sigma));
    } else {
      double lo = T0, hi = t;
      while (hi - lo > 1e-13 * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) >= 1.0 ? hi : lo) = mid;
      }
      crit = hi;
    }
    throw HorizonExceeded("local_gronwall_bound: horizon exceeded at t = " + num(t) + " (critical time " +
                              num(crit) + ")",
                          crit);
  }
  return Ht * std::pow(1.0 - x, -1.0 / sigma);
}

double admissible_time(const std::function<double(double)>& H_fn, double q, double margin_target) {
  if (!(q > 1.0)) throw DomainError("admissible_time: q must exceed 1");
  if (!(margin_target > 0.0 && margin_target <= 1.0))
    throw DomainError("admissible_time: margin_target must lie in (0,1]");
  const double H0 = H_fn(0.0);
  if (!std::isfinite(H0) || !(H0 > 0.0)) throw DomainError("admissible_time: H(0) must be finite and positive");

  const auto margin = [&](double t) { return admissibility_margin(H_fn(t), t, q); };
  double lo = 0.0, hi = 1.0;
  while (margin(hi) < margin_target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("admissible_time: margin never reaches the target");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) < margin_target ? lo : hi) = mid;
  }
  return lo;
}

double g_of_k(double k, double q) {
  require_q(q, "g_of_k");
  if (!(k >= 1.0)) throw DomainError("g_of_k: k must be at least 1");
  const double c = (q - 1.0) / (q + 1.0);
  const double e = (q - 1.0) / (q * (q + 1.0));
  const double inner = 1.0 + c * std::pow(k, (q + 1.0) / (q - 1.0)) * (k - 1.0);
  return std::pow(c, e) * std::pow(1.0 - 1.0 / k, e) * std::pow(inner, 1.0 / q);
}

double g_of_k_minus_variant(double k, double q) {
  require_q(q, "g_of_k_minus_variant");
  if (!(k >= 1.0)) throw DomainError("g_of_k_minus_variant: k must be at least 1");
  const double c = (q - 1.0) / (q + 1.0);
  const double e = (q - 1.0) / (q * (q + 1.0));
  const double inner = 1.0 - c * std::pow(k, (q + 1.0) / (q - 1.0)) * (k - 1.0);
  if (inner < 0.0) throw DomainError("g_of_k_minus_variant: negative base at k = " + num(k));
  return std::pow(c, e) * std::pow(1.0 - 1.0 / k, e) * std::pow(inner, 1.0 / q);
}

double h_of_k_eta(double k, double eta, double q) {
  require_q(q, "h_of_k_eta");
  if (!(k >= 1.0)) throw DomainError("h_of_k_eta: k must be at least 1");
  if (!(eta >= 1.0)) throw DomainError("h_of_k_eta: eta must be at least 1");
  if (eta == 1.0) return 1.0;
  const double den = g_of_k(std::pow(eta, eta_power(q)) * k, q);
  return g_of_k(k, q) / den;
}

double h_of_k_eta_expanded(double k, double eta, double q) {
  require_q(q, "h_of_k_eta_expanded");
  if (!(k >= 1.0) || !(eta >= 1.0)) throw DomainError("h_of_k_eta_expanded: needs k >= 1 and eta >= 1");
  const double c = (q - 1.0) / (q + 1.0);
  const double m = std::pow(eta, eta_power(q));
  const double a = (q - 1.0) / (q + 1.0), b = 2.0 * q / (q + 1.0);
  const double num_ = std::pow(k - 1.0, a) + c * std::pow(k, (q + 1.0) / (q - 1.0)) * std::pow(k - 1.0, b);
  const double den = std::pow(k - 1.0 / m, a) +
                     c * std::pow(m, 4.0 * q / ((q - 1.0) * (q + 1.0))) * std::pow(k, a) * std::pow(m * k - 1.0, b);
  return std::pow(num_ / den, 1.0 / q);
}

namespace {

std::vector<double> cumulative_log_integral(const std::function<double(double)>& f,
                                            const std::vector<double>& lambdas) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end()) || (!lambdas.empty() && lambdas.front() < 1.0))
    throw DomainError("partial sums: Lambda values must be sorted and at least 1");
  // eta = e^u turns the slowly decaying tail into a bounded integrand.
  const auto integrand = [&](double u) {
    const double eta = std::exp(u);
    return f(eta) * eta;
  };
  std::vector<double> out;
  double acc = 0.0, u_prev = 0.0;
  for (double L : lambdas) {
    const double u = std::log(L);
    acc += adaptive_simpson(integrand, u_prev, u, 1e-11, 40);
    u_prev = u;
    out.push_back(acc);
  }
  return out;
}

}  // namespace

std::vector<double> divergence_partial_sums(double q, const std::vector<double>& lambdas, double k) {
  require_q(q, "divergence_partial_sums");
  const double power = (q + 1.0) / (q - 1.0);
  return cumulative_log_integral([&](double eta) { return std::pow(h_of_k_eta(k, eta, q), power); }, lambdas);
}

std::vector<double> comparison_partial_sums(double q, const std::vector<double>& lambdas) {
  require_q(q, "comparison_partial_sums");
  const double e = (q + 1.0) / (q * (q - 1.0));
  const double c = std::pow(1.0 + (q - 1.0) / (q + 1.0) * std::pow(2.0, (q + 1.0) / (q - 1.0)), e) *
                   std::pow((q + 1.0) / (2.0 * q), e) / std::pow(2.0, 1.0 / q);
  const double slope = std::pow(2.0, (q * q + 4.0 * q - 1.0) / ((q - 1.0) * (q - 1.0)));
  return cumulative_log_integral([&](double eta) { return c / (1.0 + slope * eta); }, lambdas);
}

SegmentRunner make_segment_runner(const InitialData& init, const SolverConfig& cfg, const FluidParams& params) {
  return [init, cfg, params](const State& start, double t_end) {
    return run_from(start, init, cfg, params, t_end, nullptr, std::numeric_limits<int>::max());
  };
}

InitialData restart_data(const State& s, const InitialData& init) {
  InitialData d;
  d.grid = init.grid;
  d.rho0 = s.rho;
  d.J0 = s.J;
  d.v0 = s.v;
  d.Theta0 = s.Theta;
  d.rho_bar = std::max(1.0, s.rho.maxCoeff());
  d.J_lo = s.J.minCoeff();
  d.J_hi = s.J.maxCoeff();
  d.profile = init.profile;
  return d;
}

double segment_growth(const InitialData& restart, const FluidParams& prm, double delta, double C) {
  if (!(delta > 0.0)) throw JacobianDegeneracy("segment_growth: inf J must be positive", delta);
  const double q = prm.q, a = prm.alpha;
  const double rho_bar = restart.rho_bar;
  const double tail = C * std::pow(rho_bar, -(2.0 * a + 1.0) / (2.0 * (q + 1.0)));
  if (q >= 2.0) return tail;
  const Field dw = ddy(Field(restart.rho0.pow(a)), restart.grid);
  const double Lp = std::pow(integrate(dw.abs().pow(prm.p), restart.grid), 1.0 / prm.p);
  const double Linf = dw.abs().maxCoeff();
  const double rho_exp = -std::min(((3.0 * q - 2.0) * a + q) / (2.0 - q), 10.0 * a / (q - 1.0));
  return C * std::pow(delta, -24.0 / (2.0 - q)) * std::pow(rho_bar, rho_exp) *
             std::pow(Lp * Linf, 16.0 * q / (2.0 - q)) +
         tail;
}

double select_eta(double step, double q, double ratio) {
  require_q(q, "select_eta");
  if (!(step > 0.0)) throw DomainError("select_eta: step must be positive");
  if (!(ratio > 1.0)) throw DomainError("select_eta: grid ratio must exceed 1");
  const double power = (q + 1.0) / (q - 1.0), a = eta_power(q);
  for (int j = 0; j < 100000; ++j) {
    const double eta = std::pow(ratio, j);
    if (!std::isfinite(eta)) break;
    if (std::lround(2.0 * std::pow(eta, a)) < 3) continue;
    if (std::pow(h_of_k_eta(2.0, eta, q), power) < step) return eta;
  }
  throw DomainError("select_eta: no eta found for step " + num(step));
}

Schedule schedule_extension(const SegmentRunner& run_fn, const InitialData& initial, const FluidParams& prm,
                            const ExtensionConfig& cfg, int L_max) {
  const auto rep = validate_params(prm);
  if (!rep.valid()) throw DomainError("schedule_extension: " + rep.summary());
  if (initial.profile.kind != ProfileKind::power_law || !decay_report(initial.profile.l, prm).accepted)
    throw DomainError("schedule_extension: needs a power-law profile with admissible decay exponent");
  if (L_max < 1) throw DomainError("schedule_extension: L_max must be at least 1");

  Schedule sched;
  const auto sums = divergence_partial_sums(prm.q, cfg.lambdas);
  for (std::size_t i = 0; i < sums.size(); ++i) sched.divergence_partial_sums.emplace_back(cfg.lambdas[i], sums[i]);

  State current = initial_state(initial);
  double lower_sum = 0.0;
  for (int l = 1; l <= L_max; ++l) {
    const InitialData restart = restart_data(current, initial);
    Segment seg;
    seg.T_start = current.t;
    seg.H_start = energy_functional(initial_state(restart), restart, prm).E;
    seg.G = segment_growth(restart, prm, restart.J_lo, cfg.generic_C);
    // Zero restart data has H(0) = 0, which admissible_time rejects.
    const double H_start = std::max(seg.H_start, std::numeric_limits<double>::min()), G = seg.G;
    const auto H = [H_start, G](double s) { return H_start + G * s; };
    const double step = admissible_time(H, prm.q, cfg.margin_target);
    seg.T_end = seg.T_start + step;
    seg.margin_end = admissibility_margin(H(step), step, prm.q);
    seg.eta = select_eta(step, prm.q, cfg.eta_ratio);
    seg.step_lower_bound = std::pow(h_of_k_eta(2.0, seg.eta, prm.q), (prm.q + 1.0) / (prm.q - 1.0));

    Trajectory tr = run_fn(current, seg.T_end);
    if (!tr.ok()) {
      sched.failure = tr.failure;
      sched.segments.push_back(seg);
      break;
    }
    current = tr.snapshots.back();
    seg.delta = current.J.minCoeff();
    seg.completed = true;
    sched.segments.push_back(seg);
    sched.end_states.push_back(current);
    sched.cumulative_time = seg.T_end;
    lower_sum += seg.step_lower_bound;
    sched.lower_bound_partial_sums.push_back(lower_sum);
  }
  return sched;
}

}  // namespace lagflow
