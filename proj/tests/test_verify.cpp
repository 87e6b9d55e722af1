#include "doctest.h"

#include <cmath>

#include "lagflow/verify.hpp"

using namespace lagflow;

namespace {

FluidParams linear_params() {
  FluidParams prm;
  prm.p = prm.q = 2.0;
  prm.eps_reg = 0.0;
  prm.strict_mode = false;
  return prm;
}

}  // namespace

TEST_CASE("trig family is compatible with the Jacobian equation") {
  const ExactFields f = trig_family({});
  const Grid g = build_grid(1.0, 101);
  CHECK(compatibility_residual(f, g, {0.0, 0.05, 0.1}) < 1e-12);

  ExactFields broken = f;
  broken.J_t = [](double, double) { return 1.0; };
  MmsStudy st;
  st.fields = broken;
  st.params = linear_params();
  CHECK_THROWS(mms_convergence(st));
}

TEST_CASE("steady state is reproduced exactly") {
  MmsStudy st;
  st.fields = steady_state_family(1.0, 1.0);
  st.N_values = {51, 101};
  const auto tab = mms_convergence(st);
  for (const auto& row : tab.rows) CHECK(row.err < 1e-12);
}

TEST_CASE("second-order spatial convergence in the linear case") {
  MmsStudy st;
  st.fields = trig_family({});
  st.params = linear_params();
  const auto tab = mms_convergence(st);
  REQUIRE(tab.rows.size() == 3);
  CHECK(tab.rows[1].err < tab.rows[0].err);
  CHECK(tab.min_order() >= 1.8);
}

TEST_CASE("conservation audit of a smooth run") {
  const Grid g = build_grid(10.0, 201);
  const Field bump = (-g.nodes.square()).exp();
  const auto init = make_initial_data(g, 1.0 + 0.5 * bump, Field::Ones(g.N), 0.2 * bump, 0.5 + 0.2 * bump);
  FluidParams prm;
  SolverConfig cfg;
  const auto tr = run(init, cfg, prm, 0.05);
  const auto a = conservation_audit(tr, init, prm);
  CHECK(a.mass_residual <= 1e-12);
  CHECK(a.energy_drift <= 1e-9);
  CHECK(a.momentum_drift <= 1e-9);
  CHECK(a.theta_negative_nodes == 0);
}

TEST_CASE("inequality oracles are deterministic and clean") {
  const auto a = inequality_oracles(99, 2000, {1.3, 1.7});
  const auto b = inequality_oracles(99, 2000, {1.3, 1.7});
  REQUIRE(a.monotonicity.size() == 2);
  for (std::size_t i = 0; i < a.monotonicity.size(); ++i) {
    CHECK(a.monotonicity[i].violations == 0);
    CHECK(a.monotonicity[i].max_scale_residual <= 1e-10);
    CHECK(a.monotonicity[i].max_holder_ratio == b.monotonicity[i].max_holder_ratio);
  }
  for (const auto& row : a.interpolation) {
    CHECK(row.ratio > 0.0);
    CHECK(row.relative_change <= 0.02);
  }
}

TEST_CASE("interpolation ratio settles under refinement") {
  const double coarse = interpolation_ratio(1.5, 1.0, 2.0, 1001);
  const double fine = interpolation_ratio(1.5, 1.0, 2.0, 2001);
  const double finer = interpolation_ratio(1.5, 1.0, 2.0, 4001);
  CHECK(std::abs(finer - fine) <= std::abs(fine - coarse) + 1e-15);
}

TEST_CASE("linear reduction against the sparse reference") {
  const Grid g = build_grid(10.0, 201);
  const Field one = Field::Ones(g.N);
  const auto init = make_initial_data(g, one, one, (-g.nodes.square()).exp(), Field::Zero(g.N));
  SolverConfig cfg;
  const auto rep = reduction_check(linear_params(), init, cfg, 20);
  CHECK(rep.steps == 20);
  CHECK(rep.max_discrepancy <= 1e-10);
  CHECK_THROWS_AS(reduction_check(FluidParams{}, init, cfg, 5), DomainError);
}
