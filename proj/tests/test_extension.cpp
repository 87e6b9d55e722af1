#include "doctest.h"

#include <cmath>

#include "lagflow/energetics.hpp"
#include "lagflow/extension.hpp"

using namespace lagflow;

TEST_CASE("g closed form values") {
  for (double q : {1.2, 1.5, 1.8}) CHECK(g_of_k(1.0, q) == 0.0);
  const double expected = std::pow(0.1, 2.0 / 15.0) * std::pow(7.4, 2.0 / 3.0);
  CHECK(g_of_k(2.0, 1.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(g_of_k(0.5, 1.5), DomainError);
}

TEST_CASE("g is increasing") {
  for (double q : {1.2, 1.5, 1.8}) {
    double prev = g_of_k(1.0, q);
    for (int i = 1; i <= 64; ++i) {
      const double g = g_of_k(1.0 + i * 63.0 / 64.0, q);
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("h ratio properties") {
  CHECK(h_of_k_eta(2.0, 1.0, 1.5) == 1.0);
  for (double k : {2.0, 5.0, 10.0}) {
    double prev = 1.0;
    for (double eta = 1.5; eta < 1e7; eta *= 3.0) {
      const double h = h_of_k_eta(k, eta, 1.5);
      CHECK(h > 0.0);
      CHECK(h <= prev);
      prev = h;
    }
  }
  CHECK(h_of_k_eta(2.0, 1e12, 1.5) < h_of_k_eta(2.0, 1e6, 1.5));
}

TEST_CASE("local Gronwall bound") {
  CHECK(local_gronwall_bound(1.0, {}, 1.0, 1.0, 0.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(local_gronwall_bound(1.7, {}, 0.8, 0.5, 2.0, 2.0) == 1.7);
  const auto hbar = [](double) { return 0.4; };
  CHECK(local_gronwall_bound(1.0, hbar, 0.0, 1.0, 1.0, 3.5) == doctest::Approx(2.0).epsilon(1e-12));

  // Separation of variables: (f0^-s - f^-s) / (s c0) = t - T0.
  for (double sigma : {0.3, 1.0, 2.5})
    for (double t : {0.05, 0.1, 0.15}) {
      const double f0 = 1.3, c0 = 0.9;
      const double f = local_gronwall_bound(f0, {}, c0, sigma, 0.0, t);
      CHECK((std::pow(f0, -sigma) - std::pow(f, -sigma)) / (sigma * c0) == doctest::Approx(t).epsilon(1e-12));
    }

  try {
    local_gronwall_bound(1.0, {}, 1.0, 1.0, 0.0, 1.0);
    FAIL("expected the horizon to be exceeded");
  } catch (const HorizonExceeded& e) {
    CHECK(e.critical_time() == doctest::Approx(1.0));
  }
}

TEST_CASE("admissible time") {
  const auto one = [](double) { return 1.0; };
  CHECK(admissible_time(one, 1.5, 1.0) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(admissible_time(one, 1.5, 0.5) == doctest::Approx(0.1).epsilon(1e-10));
  const auto growing = [](double t) { return 1.0 + 3.0 * t; };
  const double t = admissible_time(growing, 1.5, 0.5);
  CHECK(t <= 0.1);
  CHECK(admissibility_margin(growing(t), t, 1.5) < 0.5 + 1e-9);
  CHECK_THROWS(admissible_time([](double) { return 0.0; }, 1.5, 0.5));
  CHECK_THROWS(admissible_time([](double) { return INFINITY; }, 1.5, 0.5));
}

TEST_CASE("partial sums grow with the upper limit") {
  const std::vector<double> L = {1e1, 1e2, 1e3, 1e4};
  const auto d = divergence_partial_sums(1.5, L);
  const auto c = comparison_partial_sums(1.5, L);
  for (std::size_t i = 1; i < L.size(); ++i) {
    CHECK(d[i] > d[i - 1]);
    CHECK(c[i] > c[i - 1]);
  }
}

TEST_CASE("rest state: every segment succeeds") {
  FluidParams prm;
  const Grid g = build_grid(20.0, 201);
  const auto prof = build_power_law_profile(1.0, 0.04, 1.0, g, prm);
  DensityProfile dp;
  const InitialData init =
      make_initial_data(g, prof.rho0, Field::Ones(g.N), Field::Zero(g.N), Field::Zero(g.N), dp);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  ExtensionConfig ec;
  const Schedule s = schedule_extension(make_segment_runner(init, cfg, prm), init, prm, ec, 3);
  REQUIRE_FALSE(s.failure.has_value());
  REQUIRE(s.segments.size() == 3);
  for (std::size_t l = 0; l < s.segments.size(); ++l) {
    const auto& seg = s.segments[l];
    CHECK(seg.completed);
    CHECK(seg.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(seg.T_end - seg.T_start >= seg.step_lower_bound);
    if (l > 0) CHECK(s.lower_bound_partial_sums[l] > s.lower_bound_partial_sums[l - 1]);
  }
}
