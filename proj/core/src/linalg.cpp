#include "miqp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "miqp/error.hpp"

namespace miqp {
namespace {

// In-place strict Cholesky; returns false on the first non-positive pivot.
bool strict_cholesky(Matrix& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > 0.0)) return false;
    const double root = std::sqrt(diag);
    a(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / root;
    }
  }
  return true;
}

Vector cholesky_substitute(const Matrix& l, Vector b) {
  const Eigen::Index n = l.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * b(k);
    b(i) = s / l(i, i);
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Eigen::Index k = i + 1; k < n; ++k) s -= l(k, i) * b(k);
    b(i) = s / l(i, i);
  }
  return b;
}

}  // namespace

Matrix SymFactor::factor() const {
  Matrix f = Matrix::Zero(pivoted.rows(), rank);
  for (Eigen::Index i = 0; i < pivoted.rows(); ++i) {
    f.row(perm[static_cast<std::size_t>(i)]) = pivoted.row(i).head(rank);
  }
  return f;
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

SymFactor cholesky_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky_psd needs a square matrix");
  }
  const Eigen::Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) {
        std::ostringstream os;
        os << "entries (" << i << "," << j << ") and (" << j << "," << i << ") differ by "
           << std::abs(m(i, j) - m(j, i));
        throw Error(ErrorCode::NotSymmetric, os.str());
      }
    }
  }

  // Work on a symmetrized copy, permuted in place as pivots are chosen.
  Matrix work = 0.5 * (m + m.transpose());
  SymFactor out;
  out.perm.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
  out.pivoted = Matrix::Zero(n, n);

  const double max_diag = n > 0 ? work.diagonal().cwiseAbs().maxCoeff() : 0.0;
  const double pivot_floor = tol * std::max(max_diag, 1e-300);

  Eigen::Index k = 0;
  for (; k < n; ++k) {
    Eigen::Index best = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (work(i, i) > work(best, best)) best = i;
    }
    if (work(best, best) < pivot_floor) break;
    if (best != k) {
      work.row(k).swap(work.row(best));
      work.col(k).swap(work.col(best));
      out.pivoted.row(k).swap(out.pivoted.row(best));
      std::swap(out.perm[static_cast<std::size_t>(k)], out.perm[static_cast<std::size_t>(best)]);
    }
    const double root = std::sqrt(work(k, k));
    out.pivoted(k, k) = root;
    for (Eigen::Index i = k + 1; i < n; ++i) out.pivoted(i, k) = work(i, k) / root;
    // Schur complement update on the trailing block.
    for (Eigen::Index j = k + 1; j < n; ++j) {
      const double ljk = out.pivoted(j, k);
      for (Eigen::Index i = j; i < n; ++i) {
        work(i, j) -= out.pivoted(i, k) * ljk;
        work(j, i) = work(i, j);
      }
    }
  }
  out.rank = static_cast<int>(k);

  // The trailing block must be numerically zero for a PSD input.
  for (Eigen::Index i = k; i < n; ++i) {
    if (work(i, i) < -tol * std::max(max_diag, 1.0)) {
      std::ostringstream os;
      os << "pivot " << work(i, i) << " at index " << out.perm[static_cast<std::size_t>(i)]
         << " is negative";
      throw Error(ErrorCode::NotPsd, os.str());
    }
    for (Eigen::Index j = k; j < n; ++j) {
      if (std::abs(work(i, j)) > tol * std::max(max_diag, 1.0) * 10.0 &&
          std::abs(work(i, j)) > std::sqrt(std::abs(work(i, i) * work(j, j))) + tol) {
        throw Error(ErrorCode::NotPsd, "trailing block has off-diagonal mass with zero pivots");
      }
    }
  }
  out.pivoted.conservativeResize(n, k);
  return out;
}

double min_eigenvalue_bound(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  const double norm = inf_norm(m);
  if (norm == 0.0) return 0.0;

  // Gershgorin gives lambda_min >= -norm; the smallest diagonal is an upper bound.
  double lo = -norm;
  double hi = m.diagonal().minCoeff();
  const double width = 1e-10 * norm;
  Matrix work(n, n);
  for (int iter = 0; iter < 200 && hi - lo > width; ++iter) {
    const double mid = 0.5 * (lo + hi);
    work = m;
    work.diagonal().array() -= mid;
    if (strict_cholesky(work)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Shave off roundoff in the shifted factorization.
  const double eps = std::numeric_limits<double>::epsilon();
  return lo - 4.0 * eps * static_cast<double>(n) * norm;
}

Vector spd_solve(const Matrix& m, const Vector& rhs) {
  Matrix l = m;
  if (!strict_cholesky(l)) {
    throw Error(ErrorCode::SingularSystem, "matrix is not numerically positive definite");
  }
  return cholesky_substitute(l, rhs);
}

Vector woodbury_solve(const Vector& d, const Matrix& u, const Vector& rhs) {
  const Eigen::Index m = d.size();
  if (u.rows() != m || rhs.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "woodbury_solve dimension mismatch");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(d(i) > 0.0)) throw Error(ErrorCode::InvalidArgument, "woodbury_solve needs d > 0");
  }
  const Eigen::Index p = u.cols();
  const Vector dinv = d.cwiseInverse();
  Vector base = rhs.cwiseProduct(dinv);
  if (p == 0) return base;

  if (p >= m) {
    // The capacitance system would be at least as large as the direct one.
    Matrix full = u * u.transpose();
    full.diagonal() += d;
    return spd_solve(full, rhs);
  }

  // (D + U U^T)^{-1} r = D^{-1} r - D^{-1} U (I + U^T D^{-1} U)^{-1} U^T D^{-1} r
  const Matrix dinv_u = dinv.asDiagonal() * u;
  Matrix cap = u.transpose() * dinv_u;
  cap.diagonal().array() += 1.0;
  Matrix l = cap;
  if (!strict_cholesky(l)) {
    throw Error(ErrorCode::SingularSystem, "Woodbury capacitance matrix is singular");
  }
  const double cond_guess = l.diagonal().maxCoeff() / l.diagonal().minCoeff();
  if (!(cond_guess < 1e12)) {
    throw Error(ErrorCode::SingularSystem, "Woodbury capacitance matrix is ill conditioned");
  }
  const Vector inner = cholesky_substitute(l, u.transpose() * base);
  return base - dinv_u * inner;
}

}  // namespace miqp
