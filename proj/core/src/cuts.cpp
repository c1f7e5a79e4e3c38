#include "miqp/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "miqp/error.hpp"
#include "miqp/tolerances.hpp"

namespace miqp {

std::string_view to_string(CutSource s) {
  switch (s) {
    case CutSource::Persp: return "persp";
    case CutSource::PerspRo: return "persp_ro";
    case CutSource::Bc: return "bc";
  }
  return "?";
}

SupportPartition partition_support(const Vector& x, double support_tol) {
  SupportPartition p;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    (x(i) > support_tol ? p.support : p.complement).push_back(static_cast<int>(i));
  }
  return p;
}

void classify_rank_one_columns(SupportPartition& part, const Matrix& l) {
  std::vector<char> in_support(static_cast<std::size_t>(l.rows()), 0);
  for (int i : part.support) in_support[static_cast<std::size_t>(i)] = 1;
  part.zero_columns.clear();
  part.column_nnz.assign(static_cast<std::size_t>(l.cols()), 0);
  for (Eigen::Index c = 0; c < l.cols(); ++c) {
    bool touches = false;
    int nnz = 0;
    for (Eigen::Index r = 0; r < l.rows(); ++r) {
      if (l(r, c) != 0.0) {
        ++nnz;
        touches = touches || in_support[static_cast<std::size_t>(r)];
      }
    }
    part.column_nnz[static_cast<std::size_t>(c)] = nnz;
    if (!touches && nnz > 0) part.zero_columns.push_back(static_cast<int>(c));
  }
}

namespace {

void check_point(const MiqpInstance& inst, const Vector& x) {
  if (x.size() != inst.n) throw Error(ErrorCode::DimensionMismatch, "x must have length n");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= -1e-12 && x(i) <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::InvalidArgument, "x must lie in [0,1]^n");
    }
  }
}

// Dense copy of the S columns of the rows of `m` that touch S; rows that do
// not touch S go to `dropped`.
Matrix gather_rows(const SparseMatrix& m, const std::vector<int>& pos, Eigen::Index s,
                   std::vector<int>& kept, std::vector<int>& dropped) {
  std::vector<std::pair<int, std::vector<std::pair<int, double>>>> rows;
  for (int r = 0; r < m.outerSize(); ++r) {
    std::vector<std::pair<int, double>> entries;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const int p = pos[static_cast<std::size_t>(it.col())];
      if (p >= 0 && it.value() != 0.0) entries.emplace_back(p, it.value());
    }
    if (entries.empty()) {
      dropped.push_back(r);
    } else {
      kept.push_back(r);
      rows.emplace_back(r, std::move(entries));
    }
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [c, v] : rows[i].second) out(static_cast<Eigen::Index>(i), c) = v;
  }
  return out;
}

ReducedQp build_reduced(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x) {
  check_point(inst, x);
  ReducedQp rq;
  const double tol = tolerances().support;
  std::vector<int> pos(static_cast<std::size_t>(inst.n), -1);
  for (int i = 0; i < inst.n; ++i) {
    if (x(i) > tol) {
      pos[static_cast<std::size_t>(i)] = static_cast<int>(rq.support.size());
      rq.support.push_back(i);
    }
  }
  const Eigen::Index s = static_cast<Eigen::Index>(rq.support.size());

  QpProblem& qp = rq.qp;
  qp.H.resize(s, s);
  qp.c.resize(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    const int i = rq.support[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < s; ++b) {
      qp.H(a, b) = decomp.remainder(i, rq.support[static_cast<std::size_t>(b)]);
    }
    qp.H(a, a) += decomp.delta(i) / x(i);
    qp.c(a) = inst.g(i);
  }

  const Matrix a_s = gather_rows(inst.A, pos, s, rq.a_rows, rq.dropped_a);
  const Matrix c_s = gather_rows(inst.C, pos, s, rq.c_rows, rq.dropped_c);
  const Vector dx = inst.m2() > 0 ? Vector(inst.D * x) : Vector(0);

  const Eigen::Index ra = a_s.rows();
  const Eigen::Index rc = c_s.rows();
  qp.G.resize(ra + rc, s);
  qp.rhs.resize(ra + rc);
  if (ra > 0) qp.G.topRows(ra) = a_s;
  if (rc > 0) qp.G.bottomRows(rc) = c_s;
  for (Eigen::Index r = 0; r < ra; ++r) qp.rhs(r) = inst.b(rq.a_rows[static_cast<std::size_t>(r)]);
  for (Eigen::Index r = 0; r < rc; ++r) qp.rhs(ra + r) = dx(rq.c_rows[static_cast<std::size_t>(r)]);

  // A dropped row reads 0 <= rhs; roundoff in D x for x_i just below the
  // support threshold must not flag it.
  const double scale = 1.0 + (inst.b.size() ? inst.b.cwiseAbs().maxCoeff() : 0.0) +
                       (dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0);
  for (int r : rq.dropped_a) {
    if (inst.b(r) < -1e-9 * scale) rq.dropped_row_violated = true;
  }
  for (int r : rq.dropped_c) {
    if (dx(r) < -1e-9 * scale) rq.dropped_row_violated = true;
  }
  return rq;
}

Subproblem infeasible_subproblem(const MiqpInstance& inst, std::vector<int> support) {
  Subproblem sub;
  sub.feasible = false;
  sub.value = std::numeric_limits<double>::infinity();
  sub.y = Vector::Zero(inst.n);
  sub.lambda = Vector::Zero(inst.m1());
  sub.mu = Vector::Zero(inst.m2());
  sub.support = std::move(support);
  return sub;
}

// r_i = -(2 (R_{:,S} y_S)_i + g_i + (A^T lambda)_i + (C^T mu)_i) for every i.
Vector residual_gradient(const MiqpInstance& inst, const Decomposition& decomp,
                         const Subproblem& sub) {
  Vector r = -inst.g;
  for (int j : sub.support) r.noalias() -= 2.0 * sub.y(j) * decomp.remainder.col(j);
  if (inst.m1() > 0) r -= inst.A.transpose() * sub.lambda;
  if (inst.m2() > 0) r -= inst.C.transpose() * sub.mu;
  return r;
}

Vector linking_term(const MiqpInstance& inst, const Subproblem& sub) {
  Vector v = -inst.h;
  if (inst.m2() > 0) v += inst.D.transpose() * sub.mu;
  return v;  // D_i^T mu - h_i
}

Cut finish(Cut cut, const Vector& x, const Subproblem& sub, CutSource source) {
  cut.source = source;
  cut.point = x;
  cut.marginal_value = sub.value;
  cut.offset = sub.value - cut.t.dot(x);
  if (!cut.t.allFinite() || !std::isfinite(cut.offset)) {
    throw Error(ErrorCode::NumericalFailure, "non-finite cut coefficients");
  }
  return cut;
}

void require_feasible(const Subproblem& sub) {
  if (!sub.feasible) throw Error(ErrorCode::Infeasible, "reduced QP is infeasible at this x");
}

Vector round_binary(const MiqpInstance& inst, const Vector& x) {
  check_point(inst, x);
  const double tol = tolerances().integrality;
  Vector xb(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) <= tol) xb(i) = 0.0;
    else if (std::abs(x(i) - 1.0) <= tol) xb(i) = 1.0;
    else throw Error(ErrorCode::FractionalInput, "the strengthened cut needs a binary x");
  }
  return xb;
}

}  // namespace

ReducedQp reduced_qp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x) {
  ReducedQp rq = build_reduced(inst, decomp, x);
  if (rq.support.empty() && rq.dropped_row_violated) {
    throw Error(ErrorCode::EmptySupport, "x has empty support and y = 0 is infeasible");
  }
  return rq;
}

Subproblem solve_subproblem(const MiqpInstance& inst, const Decomposition& decomp,
                            const Vector& x, std::span<const int> warm_rows) {
  const ReducedQp rq = build_reduced(inst, decomp, x);
  if (rq.dropped_row_violated) return infeasible_subproblem(inst, rq.support);

  std::vector<int> warm;
  if (!warm_rows.empty()) {
    std::vector<int> a_pos(static_cast<std::size_t>(inst.m1()), -1);
    std::vector<int> c_pos(static_cast<std::size_t>(inst.m2()), -1);
    for (std::size_t r = 0; r < rq.a_rows.size(); ++r) {
      a_pos[static_cast<std::size_t>(rq.a_rows[r])] = static_cast<int>(r);
    }
    for (std::size_t r = 0; r < rq.c_rows.size(); ++r) {
      c_pos[static_cast<std::size_t>(rq.c_rows[r])] = static_cast<int>(rq.a_rows.size() + r);
    }
    for (int row : warm_rows) {
      int p = -1;
      if (row >= 0 && row < inst.m1()) p = a_pos[static_cast<std::size_t>(row)];
      else if (row >= inst.m1() && row < inst.m1() + inst.m2()) {
        p = c_pos[static_cast<std::size_t>(row - inst.m1())];
      }
      if (p >= 0) warm.push_back(p);
    }
  }

  QpSolution sol = solve_qp(rq.qp, warm);
  if (sol.status == QpStatus::Infeasible) return infeasible_subproblem(inst, rq.support);
  if (sol.status == QpStatus::Unbounded) {
    throw Error(ErrorCode::NumericalFailure, "reduced QP reported unbounded with a PD Hessian");
  }
  // Dropped rows are absent from the QP; their multipliers stay at zero.
  sol = set_free_duals_to_zero(std::move(sol), zero_rows(rq.qp.G));

  Subproblem sub;
  sub.feasible = true;
  sub.support = rq.support;
  sub.y = Vector::Zero(inst.n);
  sub.lambda = Vector::Zero(inst.m1());
  sub.mu = Vector::Zero(inst.m2());
  for (std::size_t a = 0; a < rq.support.size(); ++a) {
    sub.y(rq.support[a]) = sol.y(static_cast<Eigen::Index>(a));
  }
  const std::size_t ra = rq.a_rows.size();
  for (std::size_t r = 0; r < ra; ++r) sub.lambda(rq.a_rows[r]) = sol.duals(static_cast<Eigen::Index>(r));
  for (std::size_t r = 0; r < rq.c_rows.size(); ++r) {
    sub.mu(rq.c_rows[r]) = sol.duals(static_cast<Eigen::Index>(ra + r));
  }
  for (int row : sol.active_set) {
    const auto r = static_cast<std::size_t>(row);
    sub.active_rows.push_back(r < ra ? rq.a_rows[r] : inst.m1() + rq.c_rows[r - ra]);
  }
  std::sort(sub.active_rows.begin(), sub.active_rows.end());
  sub.kkt = kkt_report(rq.qp, sol);
  sub.value = sol.objective + inst.h.dot(x);
  return sub;
}

double marginal_value(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x) {
  const Subproblem sub = solve_subproblem(inst, decomp, x);
  require_feasible(sub);
  return sub.value;
}

Cut cut_persp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x) {
  return cut_persp(inst, decomp, x, solve_subproblem(inst, decomp, x));
}

Cut cut_persp(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
              const Subproblem& sub) {
  require_feasible(sub);
  const Vector r = residual_gradient(inst, decomp, sub);
  const Vector link = linking_term(inst, sub);
  Cut cut;
  cut.t.resize(inst.n);
  std::vector<char> in_s(static_cast<std::size_t>(inst.n), 0);
  for (int i : sub.support) in_s[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < inst.n; ++i) {
    const double d = decomp.delta(i);
    if (in_s[static_cast<std::size_t>(i)]) {
      const double ratio = sub.y(i) / x(i);
      cut.t(i) = -d * ratio * ratio - link(i);
    } else {
      const double psi = r(i) / d;
      cut.t(i) = -0.25 * d * psi * psi - link(i);
    }
  }
  return finish(std::move(cut), x, sub, CutSource::Persp);
}

Cut cut_persp_ro(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                 RoCoefficient coefficient) {
  const Vector xb = round_binary(inst, x);
  return cut_persp_ro(inst, decomp, xb, solve_subproblem(inst, decomp, xb), coefficient);
}

Cut cut_persp_ro(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
                 const Subproblem& sub, RoCoefficient coefficient) {
  if (!decomp.rank_one_ready) {
    throw Error(ErrorCode::InvalidArgument, "decomposition has no rank-one factors");
  }
  const Vector xb = round_binary(inst, x);
  require_feasible(sub);
  SupportPartition part = partition_support(xb, tolerances().support);
  classify_rank_one_columns(part, decomp.rank_one);

  const Vector r = residual_gradient(inst, decomp, sub);
  const Vector link = linking_term(inst, sub);
  const Matrix& l = decomp.rank_one;
  const auto m = static_cast<Eigen::Index>(part.complement.size());
  const auto p = static_cast<Eigen::Index>(part.zero_columns.size());

  Vector d(m), rhs(m);
  Matrix u(m, p);
  for (Eigen::Index a = 0; a < m; ++a) {
    const int i = part.complement[static_cast<std::size_t>(a)];
    d(a) = decomp.delta(i);
    rhs(a) = 2.0 * r(i);
    for (Eigen::Index c = 0; c < p; ++c) {
      const int col = part.zero_columns[static_cast<std::size_t>(c)];
      u(a, c) = l(i, col) / std::sqrt(static_cast<double>(part.column_nnz[static_cast<std::size_t>(col)]));
    }
  }
  const Vector beta = m > 0 ? woodbury_solve(d, u, rhs) : Vector(0);

  // psi_l = sum_{j in S_C} L_jl beta_j / (2 n_l)
  Vector psi_col(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const int col = part.zero_columns[static_cast<std::size_t>(c)];
    double acc = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) acc += l(part.complement[static_cast<std::size_t>(a)], col) * beta(a);
    psi_col(c) = acc / (2.0 * part.column_nnz[static_cast<std::size_t>(col)]);
  }

  Cut cut;
  cut.t.resize(inst.n);
  for (int i : part.support) {
    const double ratio = sub.y(i) / xb(i);
    cut.t(i) = -decomp.delta(i) * ratio * ratio - link(i);
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    const int i = part.complement[static_cast<std::size_t>(a)];
    const double di = decomp.delta(i);
    const double psi = 0.5 * beta(a);
    const double w = coefficient == RoCoefficient::DeltaOver4 ? 0.25 * di : 0.25 * di * di;
    double rank_one = 0.0;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (l(i, part.zero_columns[static_cast<std::size_t>(c)]) != 0.0) {
        rank_one += psi_col(c) * psi_col(c);
      }
    }
    cut.t(i) = -w * psi * psi - 0.25 * rank_one - link(i);
  }
  return finish(std::move(cut), xb, sub, CutSource::PerspRo);
}

Cut cut_bc(const MiqpInstance& inst, const Decomposition& decomp, const Vector& x,
           const Subproblem& sub) {
  if (!decomp.low_rank_ready) {
    throw Error(ErrorCode::InvalidArgument, "decomposition has no low-rank factor");
  }
  const double d0 = decomp.delta(0);
  if ((decomp.delta.array() - d0).abs().maxCoeff() > 1e-10 * std::max(1.0, d0)) {
    throw Error(ErrorCode::NonUniformDelta, "this cut form needs a uniform diagonal");
  }
  require_feasible(sub);
  const double gamma = 1.0 / d0;
  const Matrix& e = decomp.low_rank;

  Vector es_y = Vector::Zero(e.rows());
  for (int j : sub.support) es_y.noalias() += sub.y(j) * e.col(j);
  const Vector alpha = -2.0 * (decomp.bc_beta - es_y);

  Vector dual_part = decomp.bc_g_tilde;
  if (inst.m1() > 0) dual_part += inst.A.transpose() * sub.lambda;
  if (inst.m2() > 0) dual_part += inst.C.transpose() * sub.mu;
  const Vector link = linking_term(inst, sub);

  Cut cut;
  cut.t.resize(inst.n);
  std::vector<char> in_s(static_cast<std::size_t>(inst.n), 0);
  for (int i : sub.support) in_s[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < inst.n; ++i) {
    if (in_s[static_cast<std::size_t>(i)]) {
      const double ratio = sub.y(i) / x(i);
      cut.t(i) = -(1.0 / gamma) * ratio * ratio - link(i);
    } else {
      const double v = (e.rows() > 0 ? e.col(i).dot(alpha) : 0.0) + dual_part(i);
      cut.t(i) = -0.25 * gamma * v * v - link(i);
    }
  }
  return finish(std::move(cut), x, sub, CutSource::Bc);
}

std::pair<double, double> perspective_gradient(double x, double y) {
  return {-(y * y) / (x * x), 2.0 * y / x};
}

bool in_origin_subdifferential(double phi, double psi, double slack) {
  return phi <= -0.25 * psi * psi + slack;
}

bool CutPool::insert(const Cut& cut) {
  std::vector<double> key(cut.point.data(), cut.point.data() + cut.point.size());
  if (!keys_.emplace(static_cast<int>(cut.source), std::move(key)).second) return false;
  cuts_.push_back(cut);
  return true;
}

bool CutPool::contains(CutSource source, const Vector& point) const {
  std::vector<double> key(point.data(), point.data() + point.size());
  return keys_.count({static_cast<int>(source), key}) > 0;
}

}  // namespace miqp
