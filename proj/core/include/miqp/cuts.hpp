#pragma once

#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "miqp/decompose.hpp"
#include "miqp/instance.hpp"
#include "miqp/qp.hpp"

namespace miqp {

enum class CutSource { Persp, PerspRo, Bc };

std::string_view to_string(CutSource s);

/// eta >= t^T x + offset.
struct Cut {
  Vector t;
  double offset = 0.0;
  CutSource source = CutSource::Persp;
  Vector point;                ///< generating point x0
  double marginal_value = 0.0; ///< fbar(x0)

  double evaluate(const Vector& x) const { return t.dot(x) + offset; }
};

struct SupportPartition {
  std::vector<int> support;     ///< S = {i : x_i > support_tol}
  std::vector<int> complement;  ///< S_C
  std::vector<int> zero_columns;  ///< I0: columns of L supported inside S_C
  std::vector<int> column_nnz;    ///< nnz of each column of L (filled with L)
};

SupportPartition partition_support(const Vector& x, double support_tol);

/// Adds I0 and the column counts for the rank-one factor L.
void classify_rank_one_columns(SupportPartition& part, const Matrix& l);

/// The convex QP in the variables y_S together with the bookkeeping needed to
/// map its rows and duals back to the instance.
struct ReducedQp {
  QpProblem qp;
  std::vector<int> support;
  std::vector<int> a_rows;  ///< instance A row of each leading QP row
  std::vector<int> c_rows;  ///< instance C row of each trailing QP row
  std::vector<int> dropped_a;  ///< A rows with no entries on S
  std::vector<int> dropped_c;  ///< C rows with no entries on S
  bool dropped_row_violated = false;  ///< a dropped row has negative right-hand side
};

/// Quadratic matrix R_S + diag(delta_i / x_i), linear term g_S, rows
/// A_S y <= b and C_S y <= D x. Rows with no entries on S are dropped (their
/// feasibility is recorded). Throws EmptySupport when S is empty and y = 0 is
/// infeasible.
ReducedQp reduced_qp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x);

/// Solution of the fixed-x subproblem lifted back to instance dimensions.
struct Subproblem {
  bool feasible = false;
  double value = 0.0;  ///< fbar(x) = QP objective + h^T x; +inf if infeasible
  Vector y;            ///< length n, zero off the support
  Vector lambda;       ///< duals of A rows (length m1)
  Vector mu;           ///< duals of C rows (length m2)
  std::vector<int> support;
  /// Active rows in instance numbering: A row i -> i, C row j -> m1 + j.
  std::vector<int> active_rows;
  KktReport kkt;
};

/// Solves the reduced QP at x. `warm_rows` uses the numbering of
/// Subproblem::active_rows. Free duals (dropped rows) are zero.
Subproblem solve_subproblem(const MiqpInstance& inst, const Decomposition& decomp,
                            const Vector& x, std::span<const int> warm_rows = {});

/// fbar(x). Throws Infeasible when the reduced QP has no solution.
double marginal_value(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x);

/// Perspective cut at any x in [0,1]^n.
Cut cut_persp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x);
Cut cut_persp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
              const Subproblem& sub);

/// Coefficient used on S_C in the strengthened cut. `DeltaOver4` is the
/// correct coefficient; `DeltaSquaredOver4` exists only so the verification
/// suite can confirm the auditor catches it.
enum class RoCoefficient { DeltaOver4, DeltaSquaredOver4 };

/// Rank-one strengthened cut at a binary x (FractionalInput otherwise).
/// Requires decomp.rank_one_ready.
Cut cut_persp_ro(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                 RoCoefficient coefficient = RoCoefficient::DeltaOver4);
Cut cut_persp_ro(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                 const Subproblem& sub, RoCoefficient coefficient = RoCoefficient::DeltaOver4);

/// Cut in the low-rank (E, beta, g_tilde) parametrisation. Requires uniform
/// delta (NonUniformDelta otherwise) and decomp.low_rank_ready.
Cut cut_bc(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
           const Subproblem& sub);

/// Gradient (d/dx, d/dy) of y^2 / x for x > 0.
std::pair<double, double> perspective_gradient(double x, double y);

/// Whether (phi, psi) belongs to the subdifferential of the closed
/// perspective of y^2 at the origin: phi <= -psi^2 / 4.
bool in_origin_subdifferential(double phi, double psi, double slack = 1e-12);

/// Exact-match deduplication on (source, generating point).
class CutPool {
 public:
  /// Returns false (and keeps the pool unchanged) if an identical key exists.
  bool insert(const Cut& cut);
  bool contains(CutSource source, const Vector& point) const;
  std::size_t size() const { return cuts_.size(); }
  const std::vector<Cut>& cuts() const { return cuts_; }

 private:
  std::set<std::pair<int, std::vector<double>>> keys_;
  std::vector<Cut> cuts_;
};

}  // namespace miqp
