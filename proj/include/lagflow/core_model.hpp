#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lagflow/errors.hpp"
#include "lagflow/grid.hpp"

namespace lagflow {

/// Material constants of the power-law fluid.
///
/// p is the heat-flux exponent, q the stress exponent. alpha is the (negative)
/// exponent of the rho0^alpha weight used by every energy functional. eps_reg
/// smooths the singular flux |s|^{r-2}s at s = 0 for the implicit solves.
struct FluidParams {
  double p = 1.5;
  double q = 1.5;
  double R = 1.0;
  double alpha = -6.0;
  double eps_reg = 1e-6;
  bool strict_mode = true;
};

struct ConstraintCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintCheck> checks;
  /// min{-q/(2(q-1)), -(4-p)/(2-p)}; -infinity when p = 2.
  double alpha_threshold = 0.0;

  bool valid() const;
  std::string summary() const;
};

/// Upper bound on alpha admitted by the local and global theory.
double alpha_threshold(double p, double q);

ValidationReport validate_params(const FluidParams& params);

// ---------------------------------------------------------------------------
// Constitutive laws

/// Regularized power flux (s^2 + eps^2)^{(r-2)/2} s; equals |s|^{r-2} s at eps = 0.
/// Computed on |s| and re-signed, so the result is exactly odd in s.
template <typename Scalar>
Scalar power_flux(Scalar s, Scalar r, Scalar eps) {
  using std::abs;
  using std::isfinite;
  using std::pow;
  if (!isfinite(s) || !isfinite(r) || !isfinite(eps)) throw DomainError("power_flux: non-finite input");
  const Scalar a = abs(s);
  Scalar mag;
  if (eps == Scalar(0)) {
    mag = (a == Scalar(0)) ? Scalar(0) : pow(a, r - Scalar(1));
  } else {
    mag = pow(a * a + eps * eps, (r - Scalar(2)) / Scalar(2)) * a;
  }
  return s < Scalar(0) ? -mag : mag;
}

/// d/ds of power_flux: (s^2+eps^2)^{(r-4)/2} ((r-1) s^2 + eps^2).
/// Infinite at s = 0 when eps = 0 and r < 2.
template <typename Scalar>
Scalar power_flux_derivative(Scalar s, Scalar r, Scalar eps) {
  using std::abs;
  using std::isfinite;
  using std::pow;
  if (!isfinite(s) || !isfinite(r) || !isfinite(eps)) throw DomainError("power_flux_derivative: non-finite input");
  if (eps == Scalar(0)) {
    const Scalar a = abs(s);
    if (r == Scalar(2)) return Scalar(1);
    if (a == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return (r - Scalar(1)) * pow(a, r - Scalar(2));
  }
  const Scalar s2 = s * s;
  const Scalar e2 = eps * eps;
  return pow(s2 + e2, (r - Scalar(4)) / Scalar(2)) * ((r - Scalar(1)) * s2 + e2);
}

/// Elementwise power_flux over an Eigen array expression.
template <typename Derived>
auto power_flux(const Eigen::ArrayBase<Derived>& s, typename Derived::Scalar r,
                typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  return s.derived().unaryExpr([r, eps](Scalar x) { return power_flux<Scalar>(x, r, eps); }).eval();
}

template <typename Derived>
auto power_flux_derivative(const Eigen::ArrayBase<Derived>& s, typename Derived::Scalar r,
                           typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  return s.derived()
      .unaryExpr([r, eps](Scalar x) { return power_flux_derivative<Scalar>(x, r, eps); })
      .eval();
}

/// Ideal-gas pressure R rho Theta.
template <typename Scalar>
Scalar pressure(Scalar rho, Scalar theta, Scalar R) {
  if (rho < Scalar(0) || theta < Scalar(0)) throw DomainError("pressure: negative density or temperature");
  return R * rho * theta;
}

/// rho = J0 rho0 / J, so that J rho = J0 rho0 holds node by node.
Field density_from_jacobian(const Eigen::Ref<const Field>& J, const Eigen::Ref<const Field>& J0,
                            const Eigen::Ref<const Field>& rho0);

// ---------------------------------------------------------------------------
// Initial data

enum class ProfileKind { power_law, custom };

struct DensityProfile {
  ProfileKind kind = ProfileKind::power_law;
  double K = 1.0;
  double l = 0.04;
  double A0 = 1.0;
};

/// Admissible far-field decay exponents for the global theory:
/// l_max = min{1, -(3p-2)/((2-p)alpha+3), -(p-1)/(alpha p)}.
struct DecayReport {
  double l = 0.0;
  double l_max = 0.0;
  double branch_unit = 1.0;
  /// Absent when (2-p)alpha + 3 = 0.
  std::optional<double> branch_heat;
  double branch_weight = 0.0;
  bool degenerate_branch = false;
  bool accepted = false;
  std::string note;
};

DecayReport decay_report(double l, const FluidParams& params);

struct PowerLawProfile {
  Field rho0;
  DecayReport decay;
};

/// rho0(y) = K / (1+|y|)^l sampled on the grid.
PowerLawProfile build_power_law_profile(double K, double l, double A0, const Grid& grid,
                                        const FluidParams& params);

struct InitialData {
  Grid grid;
  Field rho0, J0, v0, Theta0;
  double rho_bar = 1.0;
  double J_lo = 1.0;
  double J_hi = 1.0;
  DensityProfile profile;
};

/// Assembles InitialData, computing rho_bar = max(1, sup rho0) and the bounds of J0.
/// Throws DomainError when rho0 <= 0, J0 <= 0 or Theta0 < 0 anywhere.
InitialData make_initial_data(const Grid& grid, Field rho0, Field J0, Field v0, Field Theta0,
                              DensityProfile profile = {});

struct State {
  double t = 0.0;
  Field J, rho, v, Theta;
};

/// The t = 0 state with rho = rho0.
State initial_state(const InitialData& init);

}  // namespace lagflow
