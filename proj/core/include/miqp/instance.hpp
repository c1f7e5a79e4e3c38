#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/SparseCore>

#include "miqp/linalg.hpp"

namespace miqp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// min y^T Q y + g^T y + h^T x
///  s.t. A y <= b,  C y <= D x,  y_i (1 - x_i) = 0,  x binary,  sum x <= k.
struct MiqpInstance {
  int n = 0;
  Matrix Q;
  Vector g;
  Vector h;
  SparseMatrix A;  ///< m1 x n
  Vector b;
  SparseMatrix C;  ///< m2 x n
  SparseMatrix D;  ///< m2 x n
  std::optional<int> k;

  std::string name;
  std::optional<std::uint64_t> seed;
  std::string generator;

  int m1() const { return static_cast<int>(b.size()); }
  int m2() const { return static_cast<int>(C.rows()); }

  /// Objective of a point (x, y) ignoring feasibility.
  double objective(const Vector& x, const Vector& y) const;
};

/// Checks dimensions, k range, finiteness and Q symmetry (exact up to
/// 1e-12 relative). Throws DimensionMismatch, BadSpec or NotSymmetric.
void validate_structure(const MiqpInstance& inst);

/// validate_structure plus the positive-definiteness check on Q (NotPd).
void validate(const MiqpInstance& inst);

struct PortfolioSpec {
  int n = 0;
  std::optional<int> k;
  std::uint64_t seed = 0;
};

/// Identifier stored in instance metadata for the sampling scheme below.
inline constexpr const char* kPortfolioGenerator = "mt19937_64/splitmix64-streams/v1";

/// Draws the random data for one seed without any feasibility screening.
/// Q has off-diagonals in {1..10} (upper triangle mirrored) and diagonals in
/// {10n..20n}; mu, rho in [0.002, 0.01], alpha in [0.075, 0.125],
/// u in [0.375, 0.425]. Throws BadSpec for n < 2 or k outside [1, n].
MiqpInstance sample_portfolio(const PortfolioSpec& spec);

/// Greedy feasibility certificate for a portfolio instance (budget, return and
/// cardinality can be met simultaneously).
bool portfolio_feasible(const MiqpInstance& inst);

/// sample_portfolio, re-drawing with seed+1, seed+2, ... until the greedy
/// certificate succeeds. The seed actually used is recorded in `seed`.
/// Throws BadSpec when 64 consecutive draws fail (e.g. k too small for the
/// budget row to be reachable under the upper bounds).
MiqpInstance generate_portfolio(const PortfolioSpec& spec);

/// Text format with named sections; doubles are written in shortest
/// round-trip form so write/read is bit exact.
MiqpInstance read_instance(const std::filesystem::path& path);
MiqpInstance parse_instance(const std::string& text);
void write_instance(const MiqpInstance& inst, const std::filesystem::path& path);
std::string format_instance(const MiqpInstance& inst);

bool operator==(const MiqpInstance& a, const MiqpInstance& b);

}  // namespace miqp
