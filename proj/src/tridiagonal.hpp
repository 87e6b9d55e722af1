#pragma once

#include "lagflow/grid.hpp"

namespace lagflow::detail {

/// Thomas algorithm for lower(i) x_{i-1} + diag(i) x_i + upper(i) x_{i+1} = rhs(i).
/// lower(0) and upper(n-1) are ignored. No pivoting: callers pass diagonally
/// dominant systems.
inline Field solve_tridiagonal(const Field& lower, const Field& diag, const Field& upper,
                               const Field& rhs) {
  const Eigen::Index n = diag.size();
  Field c(n), d(n), x(n);
  c(0) = upper(0) / diag(0);
  d(0) = rhs(0) / diag(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double m = diag(i) - lower(i) * c(i - 1);
    c(i) = (i + 1 < n) ? upper(i) / m : 0.0;
    d(i) = (rhs(i) - lower(i) * d(i - 1)) / m;
  }
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

}  // namespace lagflow::detail
