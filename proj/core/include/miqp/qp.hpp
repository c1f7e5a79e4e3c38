#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "miqp/linalg.hpp"

namespace miqp {

/// min y^T H y + c^T y  s.t.  G y <= rhs.
/// Note the quadratic form carries no 1/2: the gradient is 2 H y + c.
struct QpProblem {
  Matrix H;
  Vector c;
  Matrix G;
  Vector rhs;

  Eigen::Index num_vars() const { return c.size(); }
  Eigen::Index num_rows() const { return rhs.size(); }
};

enum class QpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(QpStatus s);

struct QpSolution {
  Vector y;
  Vector duals;                 ///< one per row of G, nonnegative
  double objective = 0.0;
  QpStatus status = QpStatus::Optimal;
  std::vector<int> active_set;  ///< working set at termination, ascending
  Vector farkas;                ///< u >= 0 with u^T G = 0, u^T rhs < 0 (infeasible only)
  int iterations = 0;
};

struct KktReport {
  double stationarity = 0.0;    ///< ||2 H y + c + G^T duals||_inf
  double primal = 0.0;          ///< max(G y - rhs, 0)
  double complementarity = 0.0; ///< max_i |duals_i (g_i^T y - rhs_i)|
  double dual_sign = 0.0;       ///< max(-duals, 0)
  double scale = 1.0;

  /// Largest residual divided by scale.
  double worst_relative() const;
};

KktReport kkt_report(const QpProblem& prob, const QpSolution& sol);

/// Primal active-set method. `warm_start` lists rows to try as the initial
/// working set; it is dropped silently when it does not give a feasible start.
/// Throws MaxIterations or NumericalFailure; infeasible and unbounded problems
/// are reported through `status`.
QpSolution solve_qp(const QpProblem& prob, std::span<const int> warm_start = {});

/// Rows of G that are entirely zero.
std::vector<int> zero_rows(const Matrix& g);

/// Forces the duals of the listed rows to zero. Rows that vanish in a reduced
/// space carry no information, so their multipliers are free; zero is the
/// choice the cut formulas use.
QpSolution set_free_duals_to_zero(QpSolution sol, std::span<const int> free_rows);

}  // namespace miqp
