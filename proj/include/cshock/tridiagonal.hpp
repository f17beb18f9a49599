#pragma once

#include "cshock/types.hpp"

namespace cshock {

/// Solves a tridiagonal system in place by the Thomas algorithm.
///
/// lower(i) multiplies x(i-1), diag(i) multiplies x(i), upper(i) multiplies
/// x(i+1); lower(0) and upper(n-1) are ignored. rhs is overwritten with the
/// solution. No pivoting: the callers only build diagonally dominant systems.
inline void solve_tridiagonal(const VectorXd& lower, const VectorXd& diag, const VectorXd& upper,
                              VectorXd& rhs, VectorXd& scratch) {
  const Eigen::Index n = diag.size();
  scratch.resize(n);
  double beta = diag(0);
  rhs(0) /= beta;
  for (Eigen::Index i = 1; i < n; ++i) {
    scratch(i) = upper(i - 1) / beta;
    beta = diag(i) - lower(i) * scratch(i);
    rhs(i) = (rhs(i) - lower(i) * rhs(i - 1)) / beta;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    rhs(i) -= scratch(i + 1) * rhs(i + 1);
  }
}

}  // namespace cshock
