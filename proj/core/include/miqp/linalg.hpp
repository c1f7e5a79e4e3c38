#pragma once

#include <Eigen/Dense>
#include <vector>

namespace miqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Result of a complete-pivoting Cholesky factorization M = P^T L L^T P.
///
/// `pivoted` is lower trapezoidal (rows x rank) in pivot order and `perm[i]`
/// is the original index of the i-th pivot. Entries above the diagonal of the
/// pivoted factor are exact zeros, which the rank-one cut generator relies on
/// to read off column supports.
struct SymFactor {
  Matrix pivoted;
  std::vector<int> perm;
  int rank = 0;

  /// Factor columns in original coordinates: F F^T == M.
  Matrix factor() const;
};

/// Pivoted outer-product Cholesky for symmetric PSD matrices. Pivots below
/// tol * max initial diagonal terminate the factorization (numerical rank).
/// Throws NotSymmetric / NotPsd.
SymFactor cholesky_psd(const Matrix& m, double tol);

/// Max absolute row sum.
double inf_norm(const Matrix& m);

/// Lower bound on the smallest eigenvalue of a symmetric matrix, accurate to
/// 1e-6 * ||M||_inf (in practice much tighter), by bisection on whether the
/// shifted matrix admits a strict Cholesky factorization.
double min_eigenvalue_bound(const Matrix& m);

/// Solves (diag(d) + U U^T) beta = rhs with the Woodbury identity.
/// Throws InvalidArgument for d_i <= 0, SingularSystem when the capacitance
/// matrix breaks down.
Vector woodbury_solve(const Vector& d, const Matrix& u, const Vector& rhs);

/// Strict Cholesky solve of a symmetric positive definite system; throws
/// SingularSystem when a pivot is not positive.
Vector spd_solve(const Matrix& m, const Vector& rhs);

}  // namespace miqp
