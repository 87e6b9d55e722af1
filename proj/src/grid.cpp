#include "lagflow/grid.hpp"

#include <cmath>
#include <string>

namespace lagflow {

Grid build_grid(double r_trunc, Eigen::Index N) {
  if (!(r_trunc > 0.0) || !std::isfinite(r_trunc)) throw DomainError("build_grid: r_trunc must be positive");
  if (N < 3) throw DomainError("build_grid: need at least 3 nodes");
  if (N % 2 == 0) throw DomainError("build_grid: node count must be odd so that y = 0 is a node");
  Grid g;
  g.r_trunc = r_trunc;
  g.N = N;
  g.h = 2.0 * r_trunc / static_cast<double>(N - 1);
  g.nodes.resize(N);
  const Eigen::Index c = N / 2;
  // Fill symmetrically from the centre so that nodes are exactly odd about 0.
  g.nodes(c) = 0.0;
  for (Eigen::Index k = 1; k <= c; ++k) {
    const double y = (k == c) ? r_trunc : static_cast<double>(k) * g.h;
    g.nodes(c + k) = y;
    g.nodes(c - k) = -y;
  }
  return g;
}

Field trapezoid_weights(const Grid& grid) {
  Field w = Field::Constant(grid.N, grid.h);
  w(0) *= 0.5;
  w(grid.N - 1) *= 0.5;
  return w;
}

Field ddy(const Eigen::Ref<const Field>& f, const Grid& grid) {
  require_length(f, grid, "ddy");
  const Eigen::Index n = grid.N;
  const double h = grid.h;
  Field d(n);
  d.segment(1, n - 2) = (f.tail(n - 2) - f.head(n - 2)) / (2.0 * h);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  d(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
  return d;
}

double integrate(const Eigen::Ref<const Field>& f, const Grid& grid) {
  require_length(f, grid, "integrate");
  return (trapezoid_weights(grid) * f).sum();
}

double weighted_integral(const Eigen::Ref<const Field>& f, const Eigen::Ref<const Field>& rho0,
                         double alpha, const Eigen::Ref<const Field>& extra_weight,
                         const Grid& grid) {
  require_length(f, grid, "weighted_integral");
  require_length(rho0, grid, "weighted_integral");
  require_length(extra_weight, grid, "weighted_integral");
  if ((rho0 <= 0.0).any()) throw DomainError("weighted_integral: rho0 must be positive");
  return integrate(rho0.pow(alpha) * extra_weight * f, grid);
}

double cutoff_profile(double z) {
  z = std::abs(z);
  if (z <= 1.0) return 1.0;
  if (z >= 2.0) return 0.0;
  // psi(s) = exp(-1/s) glued so that every derivative vanishes at z = 1 and z = 2.
  const auto psi = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = psi(2.0 - z);
  const double b = psi(z - 1.0);
  return a / (a + b);
}

Field cutoff_xi(double level_r, const Grid& grid) {
  if (!(level_r >= 1.0)) throw DomainError("cutoff_xi: level_r must be >= 1");
  return grid.nodes.unaryExpr([level_r](double y) { return cutoff_profile(y / level_r); });
}

}  // namespace lagflow
