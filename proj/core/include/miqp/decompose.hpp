#pragma once

#include <optional>
#include <string_view>

#include "miqp/linalg.hpp"

namespace miqp {

enum class DiagonalStrategy {
  DiagDominance,  ///< delta_i = max(delta_min, Q_ii - sum_{j != i} |Q_ij|)
  UniformMinEig,  ///< delta_i = max(delta_min, 0.5 * lambda_min(Q))
  Auto,           ///< DiagDominance, falling back to UniformMinEig
  DominanceShift, ///< DiagDominance plus lambda_min of its remainder on every entry
  Explicit,       ///< caller-supplied delta
};

std::string_view to_string(DiagonalStrategy s);

/// Splits Q = diag(delta) + R with R PSD, optionally refined to
/// R = sum_i L_i L_i^T + N and R = E^T E.
struct Decomposition {
  Vector delta;
  Matrix remainder;  ///< R
  Matrix rank_one;   ///< L, columns are the rank-one factors (n x K); empty until requested
  Matrix residual;   ///< N
  Matrix low_rank;   ///< E (k1 x n); empty until requested
  Vector bc_beta;    ///< -1/2 (E E^T)^{-1} E g
  Vector bc_g_tilde; ///< (I - E^T (E E^T)^{-1} E) g
  double delta_min = 0.0;
  DiagonalStrategy strategy = DiagonalStrategy::DiagDominance;
  bool rank_one_ready = false;
  bool low_rank_ready = false;
};

/// 1e-6 * max_i Q_ii.
double default_delta_min(const Matrix& q);

/// Throws NotPd when Q is not positive definite and InfeasibleDelta when the
/// requested strategy cannot keep delta >= delta_min with R PSD.
Decomposition extract_diagonal(const Matrix& q, DiagonalStrategy strategy,
                               std::optional<double> delta_min = std::nullopt);

/// Uses the given delta as is. Throws InfeasibleDelta if some delta_i <= 0
/// or Q - diag(delta) is not PSD.
Decomposition with_delta(const Matrix& q, const Vector& delta);

/// Adds L (nonzero pivoted-Cholesky columns of R) and N = 0.
Decomposition rank_one_factors(Decomposition decomp);

/// Adds E with E^T E = R (full row rank) and the shifted data beta and
/// g_tilde used by the sparse-regression form of the cut.
Decomposition low_rank_factor(Decomposition decomp, const Vector& g);

/// Diagonal strategy, rank-one factors and low-rank factor in one call.
Decomposition decompose(const Matrix& q, const Vector& g,
                        DiagonalStrategy strategy = DiagonalStrategy::Auto);

}  // namespace miqp
