#include "miqp/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "miqp/error.hpp"
#include "miqp/tolerances.hpp"

namespace miqp {

std::string_view to_string(DiagonalStrategy s) {
  switch (s) {
    case DiagonalStrategy::DiagDominance: return "diag-dominance";
    case DiagonalStrategy::UniformMinEig: return "uniform-min-eig";
    case DiagonalStrategy::Auto: return "auto";
    case DiagonalStrategy::DominanceShift: return "dominance-shift";
    case DiagonalStrategy::Explicit: return "explicit";
  }
  return "?";
}

double default_delta_min(const Matrix& q) {
  return 1e-6 * q.diagonal().maxCoeff();
}

namespace {

bool remainder_is_psd(const Matrix& r, double q_norm) {
  return min_eigenvalue_bound(r) >= -tolerances().psd_slack * q_norm;
}

Decomposition make(const Matrix& q, Vector delta, double delta_min, DiagonalStrategy s) {
  Decomposition d;
  d.remainder = q;
  d.remainder.diagonal() -= delta;
  d.delta = std::move(delta);
  d.delta_min = delta_min;
  d.strategy = s;
  return d;
}

Decomposition uniform(const Matrix& q, double lambda_min, double delta_min) {
  if (lambda_min <= delta_min) {
    std::ostringstream os;
    os << "lambda_min(Q) = " << lambda_min << " does not exceed delta_min = " << delta_min;
    throw Error(ErrorCode::InfeasibleDelta, os.str());
  }
  const double value = std::max(delta_min, 0.5 * lambda_min);
  return make(q, Vector::Constant(q.rows(), value), delta_min, DiagonalStrategy::UniformMinEig);
}

}  // namespace

Decomposition extract_diagonal(const Matrix& q, DiagonalStrategy strategy,
                               std::optional<double> delta_min_opt) {
  if (q.rows() != q.cols() || q.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "Q must be square and nonempty");
  }
  if (strategy == DiagonalStrategy::Explicit) {
    throw Error(ErrorCode::InvalidArgument, "use with_delta for an explicit diagonal");
  }
  const double q_norm = std::max(1.0, inf_norm(q));
  const double lambda_min = min_eigenvalue_bound(q);
  if (!(lambda_min > 0.0)) {
    std::ostringstream os;
    os << "Q is not positive definite (eigenvalue bound " << lambda_min << ")";
    throw Error(ErrorCode::NotPd, os.str());
  }
  const double delta_min = delta_min_opt.value_or(default_delta_min(q));
  if (strategy == DiagonalStrategy::UniformMinEig) return uniform(q, lambda_min, delta_min);

  const Eigen::Index n = q.rows();
  Vector delta(n);
  Eigen::Index clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off = q.row(i).cwiseAbs().sum() - std::abs(q(i, i));
    const double raw = q(i, i) - off;
    if (raw < delta_min) ++clipped;
    delta(i) = std::max(delta_min, raw);
  }
  Decomposition d = make(q, std::move(delta), delta_min, DiagonalStrategy::DiagDominance);
  // Clipped rows are no longer dominant, so R has to be re-checked.
  const bool psd = clipped == 0 || remainder_is_psd(d.remainder, q_norm);

  if (strategy == DiagonalStrategy::DominanceShift) {
    // A certified lower bound on lambda_min(R), so R stays PSD after the shift.
    const double shift = min_eigenvalue_bound(d.remainder);
    Vector shifted = d.delta.array() + shift;
    if (shifted.minCoeff() < delta_min) return uniform(q, lambda_min, delta_min);
    Decomposition s = make(q, std::move(shifted), delta_min, DiagonalStrategy::DominanceShift);
    if (!remainder_is_psd(s.remainder, q_norm)) {
      throw Error(ErrorCode::InfeasibleDelta, "shifted remainder is not PSD");
    }
    return s;
  }
  if (strategy == DiagonalStrategy::Auto && (2 * clipped > n || !psd)) {
    return uniform(q, lambda_min, delta_min);
  }
  if (!psd) {
    throw Error(ErrorCode::InfeasibleDelta,
                "diagonal-dominance split leaves an indefinite remainder");
  }
  return d;
}

Decomposition rank_one_factors(Decomposition decomp) {
  if (decomp.remainder.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "rank_one_factors needs a remainder matrix");
  }
  const SymFactor f = cholesky_psd(decomp.remainder, tolerances().factorization);
  decomp.rank_one = f.factor();
  decomp.residual = Matrix::Zero(decomp.remainder.rows(), decomp.remainder.cols());
  decomp.rank_one_ready = true;
  return decomp;
}

Decomposition low_rank_factor(Decomposition decomp, const Vector& g) {
  if (decomp.remainder.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "low_rank_factor needs a remainder matrix");
  }
  if (g.size() != decomp.remainder.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "g has the wrong length");
  }
  const SymFactor f = cholesky_psd(decomp.remainder, tolerances().factorization);
  decomp.low_rank = f.factor().transpose();
  decomp.low_rank_ready = true;
  if (f.rank == 0) {
    decomp.bc_beta = Vector::Zero(0);
    decomp.bc_g_tilde = g;
    return decomp;
  }
  const Matrix& e = decomp.low_rank;
  const Vector w = spd_solve(e * e.transpose(), e * g);  // (E E^T)^{-1} E g
  decomp.bc_beta = -0.5 * w;
  decomp.bc_g_tilde = g - e.transpose() * w;
  return decomp;
}

Decomposition with_delta(const Matrix& q, const Vector& delta) {
  if (q.rows() != q.cols() || delta.size() != q.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "delta must match Q");
  }
  if (!(delta.minCoeff() > 0.0)) {
    throw Error(ErrorCode::InfeasibleDelta, "delta must be positive");
  }
  Decomposition d = make(q, delta, delta.minCoeff(), DiagonalStrategy::Explicit);
  if (!remainder_is_psd(d.remainder, std::max(1.0, inf_norm(q)))) {
    throw Error(ErrorCode::InfeasibleDelta, "Q - diag(delta) is not PSD");
  }
  return d;
}

Decomposition decompose(const Matrix& q, const Vector& g, DiagonalStrategy strategy) {
  return low_rank_factor(rank_one_factors(extract_diagonal(q, strategy)), g);
}

}  // namespace miqp
