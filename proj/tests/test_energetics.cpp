#include "doctest.h"

#include <cmath>

#include "lagflow/energetics.hpp"
#include "lagflow/solver.hpp"

using namespace lagflow;

namespace {

// Composite Simpson on [lo, hi] with n (even) panels.
template <class F>
double simpson(F f, double lo, double hi, long n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3;
}

InitialData power_law_data(long N, double r, double amp_v, double amp_theta) {
  FluidParams prm;
  const Grid g = build_grid(r, N);
  const auto prof = build_power_law_profile(1.0, 0.04, 1.0, g, prm);
  const Field bump = (-g.nodes.square()).exp();
  return make_initial_data(g, prof.rho0, Field::Ones(N), amp_v * bump, amp_theta * bump);
}

}  // namespace

TEST_CASE("energy of the rest state vanishes") {
  const InitialData init = power_law_data(201, 5.0, 0.0, 0.0);
  FluidParams prm;
  const auto e = energy_functional(initial_state(init), init, prm);
  CHECK(e.E == 0.0);
  for (double c : e.components) CHECK(c == 0.0);
}

TEST_CASE("unit initial Jacobian: both weightings agree") {
  const InitialData init = power_law_data(201, 5.0, 0.3, 0.2);
  FluidParams prm;
  const auto a = energy_functional(initial_state(init), init, prm, J0Weighting::divide_by_J0);
  const auto b = energy_functional(initial_state(init), init, prm, J0Weighting::none);
  CHECK(a.E == doctest::Approx(b.E).epsilon(1e-15));
}

TEST_CASE("energy components against quadrature") {
  FluidParams prm;
  const double a = prm.alpha, q = prm.q;
  auto rho0 = [](double y) { return std::pow(1.0 + std::abs(y), -0.04); };
  auto v = [](double y) { return std::exp(-y * y); };
  auto vy = [](double y) { return -2 * y * std::exp(-y * y); };
  const double r = 20.0;
  // Even integrands; rho0 has a kink at 0.
  auto split = [&](auto f) { return 2 * simpson(f, 0.0, r, 200000); };
  const double E1 = split([&](double y) { return std::pow(rho0(y), a + 1) * v(y) * v(y); });
  const double E4 = split([&](double y) { return std::pow(rho0(y), a + 1) * vy(y) * vy(y); });
  const double E6 = split([&](double y) { return std::pow(rho0(y), a) * std::pow(std::abs(vy(y)), q); });

  auto components = [&](long N) {
    const InitialData init = power_law_data(N, r, 1.0, 0.0);
    return energy_functional(initial_state(init), init, prm).components;
  };
  const auto c = components(801);
  // Trapezoid error is dominated by the kink of rho0^(a+1) v^2 at y = 0:
  // T - I = -h^2/12 times the jump of the first derivative there.
  const double h = 2 * r / 800, jump = 2 * 0.04 * -(a + 1);
  CHECK(c[0] - E1 == doctest::Approx(-h * h / 12 * jump).epsilon(2e-2));
  CHECK(c[1] == 0.0);
  CHECK(c[7] == 0.0);
  // Derivative-based terms converge at second order.
  const auto f = components(1601);
  const double e4c = std::abs(c[3] - E4), e4f = std::abs(f[3] - E4);
  CHECK(e4c / E4 < 1e-2);
  CHECK(e4c / e4f > 3.5);
  CHECK(std::abs(f[5] - E6) < std::abs(c[5] - E6));
  CHECK(std::abs(f[5] - E6) / E6 < 1e-2);
}

TEST_CASE("dissipation") {
  const InitialData init = power_law_data(201, 5.0, 0.0, 0.0);
  FluidParams prm;
  State s0 = initial_state(init), s1 = s0;
  s1.t = 0.1;
  CHECK(std::abs(dissipation_functional(s1, s0, init, prm)) < 1e-14);
  CHECK_THROWS_AS(dissipation_functional(s0, s0, init, prm), DomainError);
}

TEST_CASE("admissibility margin and envelope") {
  CHECK(admissibility_margin(1.0, 0.1, 1.5) == doctest::Approx(0.5));
  CHECK(admissibility_margin(1.0, 0.2, 1.5) == doctest::Approx(1.0));

  const InitialData rest = power_law_data(201, 5.0, 0.0, 0.0);
  FluidParams prm;
  const std::vector<double> t = {0.0, 1e-4, 2e-4};
  const auto env = bound_envelope(rest, prm, t);
  CHECK(env.H0_initial == 0.0);
  CHECK(env.H0[1] == doctest::Approx(env.G0 * 1e-4));
  CHECK((env.H0[2] - env.H0[1]) / 1e-4 == doctest::Approx(env.G0));
}

TEST_CASE("bound audit on the default run and on a corrupted trajectory") {
  const InitialData init = power_law_data(801, 20.0, 0.1, 0.1);
  FluidParams prm;
  SolverConfig cfg;
  auto tr = run(init, cfg, prm, 0.05, nullptr, 10);
  REQUIRE(tr.ok());
  const auto a = check_bounds(tr.snapshots, init, prm);
  CHECK(a.passed);
  for (const auto& row : a.rows) CHECK(row.inf_J > 0.0);

  auto bad = tr.snapshots;
  bad[3].v *= 10.0;
  const auto b = check_bounds(bad, init, prm);
  CHECK_FALSE(b.passed);
  CHECK(b.first_failure_time == doctest::Approx(bad[3].t));
}

TEST_CASE("rest state audit is stationary") {
  const Grid g = build_grid(5.0, 201);
  const Field one = Field::Ones(201);
  const auto init = make_initial_data(g, one, one, Field::Zero(201), one);
  FluidParams prm;
  SolverConfig cfg;
  const auto tr = run(init, cfg, prm, 0.02, nullptr, 5);
  const auto a = check_bounds(tr.snapshots, init, prm);
  CHECK(a.passed);
  for (const auto& row : a.rows) {
    CHECK(row.E == doctest::Approx(a.rows[0].E).epsilon(1e-12));
    CHECK(row.inf_J == doctest::Approx(1.0).epsilon(1e-12));
  }
}
