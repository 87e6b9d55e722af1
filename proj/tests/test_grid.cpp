#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lagflow/grid.hpp"

using namespace lagflow;

TEST_CASE("grid construction") {
  CHECK_THROWS(build_grid(10.0, 6));
  CHECK_THROWS(build_grid(10.0, 1));
  const Grid g = build_grid(10.0, 5);
  CHECK(g.h == 5.0);
  CHECK(g.nodes(0) == -10.0);
  CHECK(g.nodes(2) == 0.0);
  CHECK(g.nodes(4) == 10.0);
  const Grid u = build_grid(1.0, 3);
  CHECK(u.h == 1.0);
  CHECK(u.nodes(1) == 0.0);
}

TEST_CASE("derivative operator") {
  const Grid g = build_grid(3.0, 31);
  CHECK((ddy(2.0 * g.nodes, g) - 2.0).abs().maxCoeff() < 1e-13);
  CHECK(ddy(Field::Constant(31, 4.2), g).abs().maxCoeff() < 1e-13);

  auto err = [](long N) {
    const Grid s = build_grid(std::numbers::pi, N);
    return (ddy(s.nodes.sin(), s) - s.nodes.cos()).abs().maxCoeff();
  };
  const double ratio = err(401) / err(801);
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
  CHECK_THROWS(ddy(Field::Zero(5), g));
}

TEST_CASE("trapezoid integration") {
  const Grid g = build_grid(5.0, 11);
  CHECK(integrate(Field::Ones(11), g) == doctest::Approx(10.0));
  CHECK(std::abs(integrate(g.nodes.pow(3), g)) < 1e-12);
  const Grid u = build_grid(1.0, 201);
  CHECK(std::abs(integrate(u.nodes.square(), u) - 2.0 / 3.0) < 1e-4);
  CHECK(trapezoid_weights(u).sum() == doctest::Approx(2.0));
}

TEST_CASE("weighted integral against a closed form") {
  const Grid g = build_grid(1.0, 2001);
  const Field one = Field::Ones(g.N);
  const Field f = (g.nodes * 3.0).cos();
  CHECK(weighted_integral(f, one, -6.0, one, g) == doctest::Approx(integrate(f, g)));
  CHECK(weighted_integral(Field::Zero(g.N), one, -6.0, one, g) == 0.0);

  const double l = 0.04, alpha = -6.0, m = -l * alpha;
  const Field rho0 = (1.0 + g.nodes.abs()).pow(-l);
  const double exact = 2.0 * (std::pow(2.0, m + 1) - 1.0) / (m + 1);
  CHECK(std::abs(weighted_integral(one, rho0, alpha, one, g) - exact) < 1e-6);
  CHECK_THROWS(weighted_integral(one, Field::Zero(g.N), alpha, one, g));
}

TEST_CASE("cutoff function") {
  const Grid g = build_grid(10.0, 401);
  const Field xi = cutoff_xi(2.0, g);
  CHECK(xi(200) == 1.0);
  for (Eigen::Index i = 0; i < g.N; ++i) {
    CHECK(xi(i) >= 0.0);
    CHECK(xi(i) <= 1.0);
    if (std::abs(g.nodes(i)) >= 4.0) CHECK(xi(i) == 0.0);
    if (std::abs(g.nodes(i)) <= 2.0) CHECK(xi(i) == 1.0);
  }
  CHECK_THROWS(cutoff_xi(0.5, g));
}
