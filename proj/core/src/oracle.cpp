#include "miqp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "miqp/error.hpp"
#include "miqp/qp.hpp"

namespace miqp {

namespace {

long admissible_count(int n, int k) {
  long total = 0;
  long binom = 1;  // C(n, j)
  for (int j = 0; j <= k; ++j) {
    total += binom;
    if (total > kEnumerationLimit) return total;
    binom = binom * (n - j) / (j + 1);
  }
  return total;
}

// Fixed-x QP built straight from Q. Active rows are numbered like
// Subproblem::active_rows (A rows first, then C rows).
struct FixedResult {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> active;
};

FixedResult solve_fixed(const MiqpInstance& inst, const Vector& x, const std::vector<int>& warm) {
  std::vector<int> s;
  for (int i = 0; i < inst.n; ++i) {
    if (x(i) > 0.5) s.push_back(i);
  }
  const auto sz = static_cast<Eigen::Index>(s.size());
  const Matrix a = Matrix(inst.A);
  const Matrix c = Matrix(inst.C);
  const Vector dx = inst.m2() > 0 ? Vector(inst.D * x) : Vector(0);
  QpProblem qp;
  qp.H.resize(sz, sz);
  qp.c.resize(sz);
  for (Eigen::Index p = 0; p < sz; ++p) {
    qp.c(p) = inst.g(s[static_cast<std::size_t>(p)]);
    for (Eigen::Index q = 0; q < sz; ++q) qp.H(p, q) = inst.Q(s[static_cast<std::size_t>(p)], s[static_cast<std::size_t>(q)]);
  }
  const int rows = inst.m1() + inst.m2();
  qp.G.resize(rows, sz);
  qp.rhs.resize(rows);
  for (int r = 0; r < inst.m1(); ++r) {
    for (Eigen::Index p = 0; p < sz; ++p) qp.G(r, p) = a(r, s[static_cast<std::size_t>(p)]);
    qp.rhs(r) = inst.b(r);
  }
  for (int r = 0; r < inst.m2(); ++r) {
    for (Eigen::Index p = 0; p < sz; ++p) qp.G(inst.m1() + r, p) = c(r, s[static_cast<std::size_t>(p)]);
    qp.rhs(inst.m1() + r) = dx(r);
  }
  FixedResult out;
  if (sz == 0) {
    // Only y = 0 is allowed.
    const double scale = 1.0 + (rows ? qp.rhs.cwiseAbs().maxCoeff() : 0.0);
    out.feasible = rows == 0 || qp.rhs.minCoeff() >= -1e-9 * scale;
    if (out.feasible) out.value = inst.h.dot(x);
    return out;
  }
  const QpSolution sol = solve_qp(qp, warm);
  if (sol.status != QpStatus::Optimal) return out;
  out.feasible = true;
  out.value = sol.objective + inst.h.dot(x);
  out.active = sol.active_set;
  return out;
}

}  // namespace

double fixed_x_value(const MiqpInstance& inst, const Vector& x) {
  return solve_fixed(inst, x, {}).value;
}

EnumerationReport brute_force(const MiqpInstance& inst) {
  const int n = inst.n;
  const int k = inst.k.value_or(n);
  if (n > 24 || admissible_count(n, k) > kEnumerationLimit) {
    throw Error(ErrorCode::TooLarge, "too many binary points to enumerate");
  }
  EnumerationReport rep;
  std::vector<int> warm;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 0; i < total; ++i) {
    const std::uint64_t code = i ^ (i >> 1);
    if (std::popcount(code) > k) continue;
    EnumerationRow row;
    row.x = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
      if ((code >> j) & 1U) row.x(j) = 1.0;
    }
    const FixedResult fr = solve_fixed(inst, row.x, warm);
    row.feasible = fr.feasible;
    row.value = fr.value;
    if (fr.feasible) {
      warm = fr.active;
      ++rep.feasible_count;
    }
    rep.rows.push_back(std::move(row));
  }
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    if (rep.rows[r].feasible && rep.rows[r].value < rep.optimum) rep.optimum = rep.rows[r].value;
  }
  if (std::isfinite(rep.optimum)) {
    const double tol = 1e-9 * std::max(1.0, std::abs(rep.optimum));
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
      if (rep.rows[r].feasible && rep.rows[r].value <= rep.optimum + tol) {
        rep.argmin.push_back(static_cast<int>(r));
      }
    }
  }
  return rep;
}

double audit_cut(const MiqpInstance& inst, const Cut& cut, const EnumerationReport& report) {
  if (cut.t.size() != inst.n) throw Error(ErrorCode::DimensionMismatch, "cut has wrong length");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    if (row.feasible) worst = std::max(worst, cut.evaluate(row.x) - row.value);
  }
  return worst;
}

Vector fd_subgradient(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                      double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  for (int i = 0; i < inst.n; ++i) {
    if (x(i) < 10.0 * step || x(i) > 1.0 - 10.0 * step) {
      throw Error(ErrorCode::InvalidArgument, "x must be interior by at least 10 steps");
    }
  }
  const Subproblem base = solve_subproblem(inst, decomp, x);
  if (!base.feasible) throw Error(ErrorCode::Infeasible, "reduced QP infeasible at x");
  // Multipliers on the working set must be bounded away from zero.
  const double dual_floor = 1e-9 * (1.0 + std::max(base.lambda.size() ? base.lambda.cwiseAbs().maxCoeff() : 0.0,
                                                   base.mu.size() ? base.mu.cwiseAbs().maxCoeff() : 0.0));
  for (int row : base.active_rows) {
    const double dual = row < inst.m1() ? base.lambda(row) : base.mu(row - inst.m1());
    if (dual <= dual_floor) throw Error(ErrorCode::NonSmoothPoint, "weakly active constraint at x");
  }
  Vector grad(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    const Subproblem sp = solve_subproblem(inst, decomp, xp, base.active_rows);
    const Subproblem sm = solve_subproblem(inst, decomp, xm, base.active_rows);
    if (!sp.feasible || !sm.feasible || sp.active_rows != base.active_rows ||
        sm.active_rows != base.active_rows) {
      throw Error(ErrorCode::NonSmoothPoint,
                  "working set changes along coordinate " + std::to_string(i));
    }
    grad(i) = (sp.value - sm.value) / (2.0 * step);
  }
  return grad;
}

}  // namespace miqp
