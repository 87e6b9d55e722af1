#include "lagflow/core_model.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace lagflow {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

bool ValidationReport::valid() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (!c.passed) os << c.name << ": " << c.detail << "; ";
  }
  os << "alpha threshold = " << fmt(alpha_threshold);
  return os.str();
}

double alpha_threshold(double p, double q) {
  const double from_q = -q / (2.0 * (q - 1.0));
  const double from_p = (p < 2.0) ? -(4.0 - p) / (2.0 - p) : -std::numeric_limits<double>::infinity();
  return std::min(from_q, from_p);
}

ValidationReport validate_params(const FluidParams& prm) {
  ValidationReport rep;
  const auto add = [&rep](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  const auto exponent_check = [&](const char* name, double x) {
    if (!std::isfinite(x) || x <= 1.0 || x > 2.0) {
      add(name, false, std::string(name) + " = " + fmt(x) + " must lie in (1,2]");
    } else if (prm.strict_mode && x >= 2.0) {
      add(name, false, std::string(name) + " = " + fmt(x) + " must lie in the open interval (1,2) in strict mode");
    } else {
      add(name, true, "");
    }
  };
  exponent_check("p", prm.p);
  exponent_check("q", prm.q);

  add("R", std::isfinite(prm.R) && prm.R > 0.0, "R must be positive");
  add("eps_reg", std::isfinite(prm.eps_reg) && prm.eps_reg >= 0.0, "eps_reg must be nonnegative");

  const bool exps_ok = prm.p > 1.0 && prm.q > 1.0 && prm.p <= 2.0 && prm.q <= 2.0;
  rep.alpha_threshold = exps_ok ? alpha_threshold(prm.p, prm.q) : std::numeric_limits<double>::quiet_NaN();
  if (prm.strict_mode) {
    const bool ok = exps_ok && prm.alpha < rep.alpha_threshold;
    add("alpha", ok,
        "alpha = " + fmt(prm.alpha) + " must be below min{-q/(2(q-1)), -(4-p)/(2-p)} = " +
            fmt(rep.alpha_threshold));
  } else {
    add("alpha", std::isfinite(prm.alpha), "alpha must be finite");
  }
  return rep;
}

Field density_from_jacobian(const Eigen::Ref<const Field>& J, const Eigen::Ref<const Field>& J0,
                            const Eigen::Ref<const Field>& rho0) {
  if (J.size() != J0.size() || J.size() != rho0.size())
    throw DomainError("density_from_jacobian: length mismatch");
  if ((J <= 0.0).any()) throw JacobianDegeneracy("density_from_jacobian: J <= 0", J.minCoeff());
  return J0 * rho0 / J;
}

DecayReport decay_report(double l, const FluidParams& prm) {
  DecayReport rep;
  rep.l = l;
  rep.branch_unit = 1.0;
  rep.branch_weight = -(prm.p - 1.0) / (prm.alpha * prm.p);
  const double denom = (2.0 - prm.p) * prm.alpha + 3.0;
  rep.l_max = std::min(rep.branch_unit, rep.branch_weight);
  if (denom == 0.0) {
    rep.degenerate_branch = true;
    rep.note = "degenerate threshold branch: (2-p)alpha+3 = 0, branch -(3p-2)/((2-p)alpha+3) skipped";
  } else {
    rep.branch_heat = -(3.0 * prm.p - 2.0) / denom;
    // A negative value of this branch leaves no admissible l at all.
    rep.l_max = std::min(rep.l_max, *rep.branch_heat);
  }
  rep.accepted = l > 0.0 && l < rep.l_max;
  return rep;
}

PowerLawProfile build_power_law_profile(double K, double l, double A0, const Grid& grid,
                                        const FluidParams& params) {
  if (!(K > 0.0)) throw DomainError("build_power_law_profile: K must be positive");
  if (!(l > 0.0)) throw DomainError("build_power_law_profile: l must be positive");
  if (!(A0 <= K)) throw DomainError("build_power_law_profile: A0 must not exceed K");
  PowerLawProfile out;
  out.rho0 = K / (1.0 + grid.nodes.abs()).pow(l);
  out.decay = decay_report(l, params);
  return out;
}

InitialData make_initial_data(const Grid& grid, Field rho0, Field J0, Field v0, Field Theta0,
                              DensityProfile profile) {
  require_length(rho0, grid, "make_initial_data(rho0)");
  require_length(J0, grid, "make_initial_data(J0)");
  require_length(v0, grid, "make_initial_data(v0)");
  require_length(Theta0, grid, "make_initial_data(Theta0)");
  if ((rho0 <= 0.0).any()) throw DomainError("initial density must be positive on the truncated domain");
  if ((J0 <= 0.0).any()) throw DomainError("initial Jacobian must be positive");
  if ((Theta0 < 0.0).any()) throw DomainError("initial temperature must be nonnegative");
  if (!rho0.allFinite() || !J0.allFinite() || !v0.allFinite() || !Theta0.allFinite())
    throw DomainError("initial data must be finite");
  InitialData d;
  d.grid = grid;
  d.rho_bar = std::max(1.0, rho0.maxCoeff());
  d.J_lo = J0.minCoeff();
  d.J_hi = J0.maxCoeff();
  d.rho0 = std::move(rho0);
  d.J0 = std::move(J0);
  d.v0 = std::move(v0);
  d.Theta0 = std::move(Theta0);
  d.profile = profile;
  return d;
}

State initial_state(const InitialData& init) {
  State s;
  s.t = 0.0;
  s.J = init.J0;
  s.rho = init.rho0;
  s.v = init.v0;
  s.Theta = init.Theta0;
  return s;
}

}  // namespace lagflow
