#include "doctest.h"

#include <cmath>
#include <random>

#include "lagflow/core_model.hpp"

using namespace lagflow;

TEST_CASE("admissible parameters and the alpha threshold") {
  FluidParams prm;
  const auto rep = validate_params(prm);
  CHECK(rep.valid());
  CHECK(rep.alpha_threshold == doctest::Approx(-5.0));

  prm.alpha = -4.0;
  CHECK_FALSE(validate_params(prm).valid());

  FluidParams linear;
  linear.q = 2.0;
  CHECK_FALSE(validate_params(linear).valid());
  linear.strict_mode = false;
  CHECK(validate_params(linear).valid());
}

TEST_CASE("power-law flux closed forms") {
  CHECK(power_flux(4.0, 1.5, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power_flux(-4.0, 1.5, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(power_flux(3.0, 2.0, 0.0) == 3.0);
  CHECK(power_flux(0.0, 1.5, 0.0) == 0.0);
  CHECK(power_flux_derivative(0.0, 1.5, 0.01) == doctest::Approx(10.0).epsilon(1e-13));
  CHECK_THROWS_AS(power_flux(std::nan(""), 1.5, 0.0), DomainError);
}

TEST_CASE("flux derivative matches a centred difference") {
  for (double r : {1.2, 1.5, 1.9}) {
    for (double s : {-3.0, -0.2, 0.05, 0.7, 5.0}) {
      const double eps = 1e-3, d = 1e-6 * std::max(1.0, std::abs(s));
      const double fd = (power_flux(s + d, r, eps) - power_flux(s - d, r, eps)) / (2 * d);
      CHECK(power_flux_derivative(s, r, eps) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("flux is monotone on random pairs") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (double r : {1.1, 1.5, 1.9})
    for (int k = 0; k < 2000; ++k) {
      const double a = u(gen), b = u(gen);
      CHECK((power_flux(a, r, 0.0) - power_flux(b, r, 0.0)) * (a - b) >= 0.0);
    }
}

TEST_CASE("pressure") {
  CHECK(pressure(2.0, 3.0, 1.0) == 6.0);
  CHECK(pressure(0.0, 5.0, 1.0) == 0.0);
  CHECK(pressure(1.5, 2.0, 0.4) == doctest::Approx(1.2));
  CHECK_THROWS_AS(pressure(-1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("density from the Jacobian") {
  const Field J0 = Field::Constant(5, 1.3), rho0 = Field::LinSpaced(5, 0.5, 2.0);
  CHECK(((density_from_jacobian(J0, J0, rho0) - rho0) / rho0).abs().maxCoeff() < 1e-15);
  CHECK((density_from_jacobian(2 * J0, J0, rho0) - rho0 / 2).abs().maxCoeff() < 1e-15);
  const Field J = Field::LinSpaced(5, 0.7, 1.9);
  const Field rho = density_from_jacobian(J, J0, rho0);
  CHECK(((J0 * rho0 / rho - J) / J).abs().maxCoeff() < 1e-14);
  Field bad = J;
  bad(2) = 0.0;
  CHECK_THROWS_AS(density_from_jacobian(bad, J0, rho0), JacobianDegeneracy);
}

TEST_CASE("decay exponent limits") {
  FluidParams prm;
  prm.alpha = -7.0;
  const auto ok = decay_report(0.04, prm);
  CHECK(ok.l_max == doctest::Approx(1.0 / 21.0));
  CHECK(ok.accepted);
  CHECK_FALSE(decay_report(0.1, prm).accepted);

  const Grid g = build_grid(1.0, 3);
  const auto prof = build_power_law_profile(1.0, 0.04, 1.0, g, prm);
  CHECK(prof.rho0(1) == 1.0);
  CHECK(prof.rho0(2) == doctest::Approx(std::pow(2.0, -0.04)));
}

TEST_CASE("initial data rejects negative temperature") {
  const Grid g = build_grid(1.0, 5);
  const Field one = Field::Ones(5);
  Field theta = Field::Zero(5);
  CHECK_NOTHROW(make_initial_data(g, one, one, Field::Zero(5), theta));
  theta(3) = -1e-3;
  CHECK_THROWS_AS(make_initial_data(g, one, one, Field::Zero(5), theta), DomainError);
  const auto init = make_initial_data(g, 2 * one, one, Field::Zero(5), Field::Zero(5));
  CHECK(init.rho_bar == 2.0);
  const State s = initial_state(init);
  CHECK(s.t == 0.0);
  CHECK((s.rho - init.rho0).abs().maxCoeff() == 0.0);
}
