#pragma once

#include <chrono>
#include <limits>
#include <utility>
#include <vector>

#include "miqp/linalg.hpp"

namespace miqp {

enum class LpStatus { Optimal, Infeasible, IterationLimit, TimeLimit };

/// Bounded-variable dual simplex for  min c^T z  s.t.  rows z <= rhs,  l <= z <= u,
/// kept warm across row additions and bound changes. The starting basis is
/// all slacks, so the caller must supply a cost vector that is dual feasible
/// for it (every variable with a nonzero cost needs the matching finite bound).
///
/// Dense compact tableau T = B^{-1} N: a pivot is one rank-one update, and a
/// new row only needs its basic part eliminated.
class DualSimplex {
 public:
  using Entry = std::pair<int, double>;
  using Clock = std::chrono::steady_clock;

  DualSimplex(Vector lower, Vector upper, Vector cost);

  int num_vars() const { return n_; }
  int num_rows() const { return m_; }

  /// Appends sum_j a_j z_j <= rhs with a basic slack. Returns the row index.
  int add_row(const std::vector<Entry>& entries, double rhs);

  void set_bounds(int var, double lower, double upper);
  double lower(int var) const { return lower_[static_cast<std::size_t>(var)]; }
  double upper(int var) const { return upper_[static_cast<std::size_t>(var)]; }

  LpStatus solve(Clock::time_point deadline = Clock::time_point::max());

  /// Structural values.
  Vector primal() const;
  double objective() const;
  /// Largest violation of the reduced-cost sign conditions.
  double dual_infeasibility() const;
  /// max |rows z + s - rhs| at the current basis.
  double primal_residual() const;

  long iterations() const { return iterations_; }
  long refactorizations() const { return refactors_; }
  long basis_resets() const { return resets_; }

 private:
  double value(int var) const { return value_[static_cast<std::size_t>(var)]; }
  bool is_free(int var) const;
  bool is_fixed(int var) const;
  void place_nonbasic(int col);
  void pivot(int r, int k, double leaving_target);
  void crash_free_variables();
  /// Recomputes tableau, values and reduced costs from the row data.
  /// Returns false for a singular basis.
  bool refactor();
  void reset_basis();
  /// refactor(), falling back to the slack basis.
  void refresh();
  int choose_leaving() const;
  int choose_entering(int r, bool increase) const;
  bool ok_sign(int var, double d) const;
  void ensure_capacity(int rows);

  int n_ = 0;  // structurals
  int m_ = 0;  // rows
  std::vector<std::vector<Entry>> rows_;
  std::vector<double> rhs_;
  std::vector<double> lower_, upper_, cost_, value_;  // all variables (structurals then slacks)
  std::vector<int> basis_;     // row -> variable
  std::vector<int> nonbasic_;  // column -> variable
  std::vector<int> where_;     // variable -> row (basic) or column (nonbasic)
  std::vector<char> basic_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tab_;
  Vector d_;  // reduced costs of the nonbasic columns
  long iterations_ = 0;
  long refactors_ = 0;
  long resets_ = 0;
  bool dual_trouble_ = false;  // a nonbasic variable wants a bound it does not have
  int since_refactor_ = 0;
  bool bland_ = false;
};

}  // namespace miqp
