#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "lagflow/errors.hpp"

namespace lagflow {

/// Nodal field on the material (Lagrangian) grid.
template <typename Scalar>
using FieldT = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
using Field = FieldT<double>;

/// Uniform symmetric grid on [-r_trunc, r_trunc] with an odd number of nodes,
/// so that y = 0 is always a node.
struct Grid {
  double r_trunc = 0.0;
  Eigen::Index N = 0;
  double h = 0.0;
  Field nodes;

  Eigen::Index size() const { return N; }
  Eigen::Index center() const { return N / 2; }
};

Grid build_grid(double r_trunc, Eigen::Index N);

/// Trapezoid weights: h in the interior, h/2 at both ends.
Field trapezoid_weights(const Grid& grid);

/// Second-order central differences inside, second-order one-sided at the ends.
Field ddy(const Eigen::Ref<const Field>& field, const Grid& grid);

/// Trapezoid rule over [-r_trunc, r_trunc].
double integrate(const Eigen::Ref<const Field>& field, const Grid& grid);

/// Trapezoid value of  int rho0^alpha * extra_weight * f dy.
double weighted_integral(const Eigen::Ref<const Field>& f, const Eigen::Ref<const Field>& rho0,
                         double alpha, const Eigen::Ref<const Field>& extra_weight,
                         const Grid& grid);

/// Smooth plateau function: 1 on |y| <= level_r, 0 on |y| >= 2 level_r,
/// nonincreasing in |y| in between.
Field cutoff_xi(double level_r, const Grid& grid);

/// Scalar profile of the cutoff at z = |y| / level_r.
double cutoff_profile(double z);

inline void require_length(const Eigen::Ref<const Field>& f, const Grid& grid, const char* what) {
  if (f.size() != grid.N) throw DomainError(std::string(what) + ": field length does not match grid");
}

}  // namespace lagflow
