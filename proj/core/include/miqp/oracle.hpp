#pragma once

#include <limits>
#include <vector>

#include "miqp/cuts.hpp"
#include "miqp/decompose.hpp"
#include "miqp/instance.hpp"

namespace miqp {

struct EnumerationRow {
  Vector x;
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
};

struct EnumerationReport {
  std::vector<EnumerationRow> rows;  ///< Gray-code order
  double optimum = std::numeric_limits<double>::infinity();
  std::vector<int> argmin;  ///< indices into rows
  long feasible_count = 0;
};

/// Largest number of admissible binaries brute_force accepts.
inline constexpr long kEnumerationLimit = 1L << 18;

/// Solves min y^T Q y + g^T y + h^T x with x fixed for every binary x with
/// sum x <= k. Uses Q directly (no decomposition) and warm-starts each QP
/// from the previous active set. Throws TooLarge past kEnumerationLimit.
EnumerationReport brute_force(const MiqpInstance& inst);

/// Value of the MIQP with x fixed (the independent oracle QP); +inf if infeasible.
double fixed_x_value(const MiqpInstance& inst, const Vector& x);

/// max over feasible rows of t^T x + offset - value.
double audit_cut(const MiqpInstance& inst, const Cut& cut, const EnumerationReport& report);

/// Centred differences of the marginal function. Requires every x_i in
/// [10 step, 1 - 10 step]. Throws NonSmoothPoint when the QP working set
/// differs between x and x +- step e_i, or when a working-set row has a
/// multiplier that is not clearly positive.
Vector fd_subgradient(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                      double step);

}  // namespace miqp
