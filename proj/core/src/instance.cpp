#include "miqp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "miqp/error.hpp"

namespace miqp {

double MiqpInstance::objective(const Vector& x, const Vector& y) const {
  return y.dot(Q * y) + g.dot(y) + h.dot(x);
}

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

bool all_finite(const SparseMatrix& m) {
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (!std::isfinite(it.value())) return false;
    }
  }
  return true;
}

}  // namespace

void validate_structure(const MiqpInstance& inst) {
  const int n = inst.n;
  require(n >= 1, ErrorCode::DimensionMismatch, "n must be positive");
  require(inst.Q.rows() == n && inst.Q.cols() == n, ErrorCode::DimensionMismatch,
          "Q must be n x n");
  require(inst.g.size() == n && inst.h.size() == n, ErrorCode::DimensionMismatch,
          "g and h must have length n");
  require(inst.A.rows() == inst.b.size() && (inst.A.rows() == 0 || inst.A.cols() == n),
          ErrorCode::DimensionMismatch, "A must be m1 x n with m1 = len(b)");
  require(inst.C.rows() == inst.D.rows() && (inst.C.rows() == 0 || inst.C.cols() == n) &&
              (inst.D.rows() == 0 || inst.D.cols() == n),
          ErrorCode::DimensionMismatch, "C and D must both be m2 x n");
  if (inst.k) {
    require(*inst.k >= 1 && *inst.k <= n, ErrorCode::BadSpec, "k must lie in [1, n]");
  }
  require(inst.Q.allFinite() && inst.g.allFinite() && inst.h.allFinite() &&
              inst.b.allFinite() && all_finite(inst.A) && all_finite(inst.C) &&
              all_finite(inst.D),
          ErrorCode::DimensionMismatch, "instance data must be finite");
  const double scale = std::max(1.0, inst.Q.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(inst.Q(i, j) - inst.Q(j, i)) > 1e-12 * scale) {
        std::ostringstream os;
        os << "Q is not symmetric at (" << i << ", " << j << "): " << inst.Q(i, j)
           << " vs " << inst.Q(j, i);
        throw Error(ErrorCode::NotSymmetric, os.str());
      }
    }
  }
}

void validate(const MiqpInstance& inst) {
  validate_structure(inst);
  if (min_eigenvalue_bound(inst.Q) <= 0.0) {
    throw Error(ErrorCode::NotPd, "Q is not positive definite");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// One independent stream per field so adding a field never shifts the others.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t field)
      : engine_(splitmix64(seed ^ splitmix64(field))) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int integer(int lo, int hi) {
    const int span = hi - lo + 1;
    return lo + std::min(span - 1, static_cast<int>(unit() * span));
  }

 private:
  std::mt19937_64 engine_;
};

enum Field : std::uint64_t { kOffDiag = 1, kDiag, kMu, kAlpha, kUpper, kRho };

struct PortfolioData {
  Vector mu, alpha, upper;
  double rho = 0.0;
};

SparseMatrix from_triplets(int rows, int cols, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

MiqpInstance encode_portfolio(int n, std::optional<int> k, const Matrix& q,
                              const PortfolioData& d) {
  MiqpInstance inst;
  inst.n = n;
  inst.Q = q;
  inst.g = Vector::Zero(n);
  inst.h = Vector::Zero(n);
  inst.k = k;

  std::vector<Eigen::Triplet<double>> a;
  for (int i = 0; i < n; ++i) {
    a.emplace_back(0, i, 1.0);
    a.emplace_back(1, i, -1.0);
    a.emplace_back(2, i, -d.mu(i));
  }
  inst.A = from_triplets(3, n, a);
  inst.b = Vector(3);
  inst.b << 1.0, -1.0, -d.rho;

  std::vector<Eigen::Triplet<double>> c, dd;
  for (int i = 0; i < n; ++i) {
    c.emplace_back(2 * i, i, 1.0);
    dd.emplace_back(2 * i, i, d.upper(i));
    c.emplace_back(2 * i + 1, i, -1.0);
    dd.emplace_back(2 * i + 1, i, -d.alpha(i));
  }
  inst.C = from_triplets(2 * n, n, c);
  inst.D = from_triplets(2 * n, n, dd);
  return inst;
}

bool greedy_feasible(const PortfolioData& d, int kmax) {
  const int n = static_cast<int>(d.mu.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return d.mu(a) > d.mu(b); });
  for (int j = 1; j <= std::min(kmax, n); ++j) {
    double lo = 0.0, hi = 0.0;
    for (int r = 0; r < j; ++r) {
      lo += d.alpha(order[static_cast<std::size_t>(r)]);
      hi += d.upper(order[static_cast<std::size_t>(r)]);
    }
    if (lo > 1.0) break;
    if (hi < 1.0) continue;
    double budget = 1.0 - lo;
    double ret = 0.0;
    for (int r = 0; r < j; ++r) {
      const int i = order[static_cast<std::size_t>(r)];
      const double extra = std::min(budget, d.upper(i) - d.alpha(i));
      budget -= extra;
      ret += d.mu(i) * (d.alpha(i) + extra);
    }
    if (ret >= d.rho) return true;
  }
  return false;
}

PortfolioData read_portfolio(const MiqpInstance& inst) {
  const int n = inst.n;
  if (inst.m1() != 3 || inst.m2() != 2 * n) {
    throw Error(ErrorCode::BadSpec, "instance does not have the portfolio row layout");
  }
  PortfolioData d;
  const Matrix a = Matrix(inst.A);
  const Matrix dm = Matrix(inst.D);
  d.mu = -a.row(2).transpose();
  d.rho = -inst.b(2);
  d.upper = Vector(n);
  d.alpha = Vector(n);
  for (int i = 0; i < n; ++i) {
    d.upper(i) = dm(2 * i, i);
    d.alpha(i) = -dm(2 * i + 1, i);
  }
  return d;
}

}  // namespace

MiqpInstance sample_portfolio(const PortfolioSpec& spec) {
  const int n = spec.n;
  if (n < 2) throw Error(ErrorCode::BadSpec, "portfolio instances need n >= 2");
  if (spec.k && (*spec.k < 1 || *spec.k > n)) {
    throw Error(ErrorCode::BadSpec, "k must lie in [1, n]");
  }
  Matrix q = Matrix::Zero(n, n);
  Stream off(spec.seed, kOffDiag);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      q(i, j) = q(j, i) = off.integer(1, 10);
    }
  }
  Stream diag(spec.seed, kDiag);
  for (int i = 0; i < n; ++i) q(i, i) = diag.integer(10 * n, 20 * n);

  PortfolioData d;
  d.mu = Vector(n);
  d.alpha = Vector(n);
  d.upper = Vector(n);
  Stream mu(spec.seed, kMu), alpha(spec.seed, kAlpha), upper(spec.seed, kUpper);
  for (int i = 0; i < n; ++i) {
    d.mu(i) = mu.uniform(0.002, 0.01);
    d.alpha(i) = alpha.uniform(0.075, 0.125);
    d.upper(i) = upper.uniform(0.375, 0.425);
  }
  d.rho = Stream(spec.seed, kRho).uniform(0.002, 0.01);

  MiqpInstance inst = encode_portfolio(n, spec.k, q, d);
  inst.seed = spec.seed;
  inst.generator = kPortfolioGenerator;
  std::ostringstream name;
  name << "portfolio_n" << n << "_k" << (spec.k ? std::to_string(*spec.k) : "none") << "_s"
       << spec.seed;
  inst.name = name.str();
  return inst;
}

bool portfolio_feasible(const MiqpInstance& inst) {
  return greedy_feasible(read_portfolio(inst), inst.k.value_or(inst.n));
}

MiqpInstance generate_portfolio(const PortfolioSpec& spec) {
  constexpr int kAttempts = 64;
  PortfolioSpec attempt = spec;
  for (int i = 0; i < kAttempts; ++i, ++attempt.seed) {
    MiqpInstance inst = sample_portfolio(attempt);
    if (portfolio_feasible(inst)) {
      std::ostringstream name;
      name << "portfolio_n" << spec.n << "_k" << (spec.k ? std::to_string(*spec.k) : "none")
           << "_s" << spec.seed;
      inst.name = name.str();
      return inst;
    }
  }
  throw Error(ErrorCode::BadSpec, "no feasible portfolio instance found for this n, k and seed");
}

}  // namespace miqp
