#pragma once

#include <complex>

#include <Eigen/Dense>

namespace mecoff {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// True when every entry is finite (no NaN/Inf).
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Solves A x = b for Hermitian positive-definite A via Cholesky.
///
/// Throws Error(NotPositiveDefinite) when a pivot is not strictly positive,
/// and Error(InvalidArgument) on shape mismatch or a non-Hermitian input.
ComplexVector solve_hpd_system(const ComplexMatrix& a, const ComplexVector& b);

/// Smallest eigenvalue of a real symmetric matrix.
double min_eigenvalue(const RealMatrix& m);

}  // namespace mecoff
