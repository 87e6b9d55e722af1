#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "lagflow/solver.hpp"

using namespace lagflow;

namespace {

InitialData smooth_data(double amp, double theta_amp, long N = 201) {
  const Grid g = build_grid(5.0, N);
  const Field bump = (-g.nodes.square()).exp();
  return make_initial_data(g, Field::Ones(N), Field::Ones(N), amp * bump, 1.0 + theta_amp * bump);
}

}  // namespace

TEST_CASE("Jacobian update") {
  const Grid g = build_grid(1.0, 11);
  const Field one = Field::Ones(11);
  CHECK((update_jacobian(one, Field::Zero(11), 0.1, g, 1e-8) - one).abs().maxCoeff() == 0.0);
  CHECK((update_jacobian(one, g.nodes, 0.1, g, 1e-8) - 1.1).abs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(update_jacobian(one, -g.nodes, 2.0, g, 1e-8), JacobianDegeneracy);
}

TEST_CASE("constant field is a fixed point of the diffusion step") {
  const Grid g = build_grid(2.0, 41);
  const Field one = Field::Ones(41);
  SolverConfig cfg;
  const auto res = implicit_power_diffusion_step(one, Field::Constant(41, 3.0), 1.5, 1e-6, one, one,
                                                 Field::Zero(41), 1e-2, g, cfg);
  CHECK((res.w - 3.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("linear diffusion step equals a direct banded solve") {
  const long n = 61;
  const Grid g = build_grid(3.0, n);
  const Field one = Field::Ones(n);
  const Field w_old = (-g.nodes.square()).exp() + 0.1 * g.nodes;
  const Field src = 0.3 * g.nodes.sin();
  const double dt = 0.05;
  SolverConfig cfg;
  const auto res = implicit_power_diffusion_step(one, w_old, 2.0, 0.0, one, one, src, dt, g, cfg);

  Eigen::VectorXd omega = Eigen::VectorXd::Constant(n, g.h);
  omega(0) = omega(n - 1) = g.h / 2;
  Eigen::MatrixXd A = omega.asDiagonal();
  Eigen::VectorXd b = omega.cwiseProduct((w_old + dt * src).matrix());
  for (long i = 0; i + 1 < n; ++i) {
    const double c = dt / g.h;
    A(i, i) += c;
    A(i + 1, i + 1) += c;
    A(i, i + 1) -= c;
    A(i + 1, i) -= c;
  }
  const Eigen::VectorXd ref = A.partialPivLu().solve(b);
  CHECK((res.w.matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("three-node Newton residual") {
  const Grid g = build_grid(1.0, 3);
  const Field one = Field::Ones(3);
  Field w_old(3);
  w_old << 1.0, 0.0, -0.5;
  SolverConfig cfg;
  const double dt = 0.2, r = 1.5, eps = 1e-3;
  const auto res = implicit_power_diffusion_step(one, w_old, r, eps, one, one, Field::Zero(3), dt, g, cfg);
  const Field& w = res.w;
  const double F0 = power_flux(w(1) - w(0), r, eps), F1 = power_flux(w(2) - w(1), r, eps);
  CHECK(std::abs(0.5 * (w(0) - w_old(0)) - dt * F0) < 1e-10);
  CHECK(std::abs(1.0 * (w(1) - w_old(1)) - dt * (F1 - F0)) < 1e-10);
  CHECK(std::abs(0.5 * (w(2) - w_old(2)) + dt * F1) < 1e-10);
}

TEST_CASE("steady state is preserved by one Picard step") {
  const InitialData init = smooth_data(0.0, 0.0);
  SolverConfig cfg;
  FluidParams prm;
  const auto [s, rep] = picard_step(initial_state(init), init, 1e-3, cfg, prm);
  CHECK(rep.picard_iters <= 1);
  CHECK((s.v).abs().maxCoeff() < 1e-14);
  CHECK((s.Theta - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((s.J - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("Picard iterations do not grow when dt is halved") {
  const InitialData init = smooth_data(0.2, 0.2);
  SolverConfig cfg;
  FluidParams prm;
  const auto a = picard_step(initial_state(init), init, 2e-3, cfg, prm).second;
  const auto b = picard_step(initial_state(init), init, 1e-3, cfg, prm).second;
  CHECK(b.picard_iters <= a.picard_iters);
}

TEST_CASE("viscous heating keeps a cold fluid nonnegative") {
  const Grid g = build_grid(5.0, 201);
  const Field one = Field::Ones(201);
  const auto init = make_initial_data(g, one, one, 0.5 * (-g.nodes.square()).exp(), Field::Zero(201));
  SolverConfig cfg;
  FluidParams prm;
  const auto s = picard_step(initial_state(init), init, 1e-3, cfg, prm).first;
  CHECK(s.Theta.minCoeff() >= -cfg.tol_neg);
  CHECK(s.Theta.maxCoeff() > 0.0);
}

TEST_CASE("runs: timestamps, mass identity, zero horizon") {
  const InitialData init = smooth_data(0.1, 0.1);
  SolverConfig cfg;
  FluidParams prm;
  const auto zero = run(init, cfg, prm, 0.0);
  REQUIRE(zero.snapshots.size() == 1);
  CHECK((zero.snapshots[0].v - init.v0).abs().maxCoeff() == 0.0);

  const auto tr = run(init, cfg, prm, 0.0205);
  REQUIRE(tr.ok());
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k) CHECK(tr.snapshots[k].t > tr.snapshots[k - 1].t);
  CHECK(std::abs(tr.snapshots.back().t - 0.0205) <= cfg.dt / 2);
  const Field m0 = init.J0 * init.rho0;
  for (const auto& s : tr.snapshots) CHECK((s.J * s.rho - m0).abs().maxCoeff() / m0.maxCoeff() <= 1e-12);
}

TEST_CASE("density floor") {
  const InitialData init = smooth_data(0.1, 0.1);
  const InitialData same = apply_density_floor(init, 0.0);
  CHECK((same.rho0 - init.rho0).abs().maxCoeff() == 0.0);
  const InitialData up = apply_density_floor(init, 1e-2);
  CHECK((up.rho0 - init.rho0 - 1e-2).abs().maxCoeff() < 1e-15);
}
