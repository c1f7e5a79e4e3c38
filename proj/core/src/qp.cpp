#include "miqp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "miqp/error.hpp"
#include "miqp/tolerances.hpp"

namespace miqp {

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

double KktReport::worst_relative() const {
  return std::max({stationarity, primal, complementarity, dual_sign}) / scale;
}

KktReport kkt_report(const QpProblem& prob, const QpSolution& sol) {
  KktReport r;
  const Vector hy2 = 2.0 * prob.H * sol.y;
  Vector station = hy2 + prob.c;
  double gt_scale = 0.0;
  double gy_scale = 0.0;
  if (prob.num_rows() > 0) {
    station += prob.G.transpose() * sol.duals;
    gt_scale = (prob.G.cwiseAbs().transpose() * sol.duals.cwiseAbs()).maxCoeff();
    gy_scale = (prob.G.cwiseAbs() * sol.y.cwiseAbs()).maxCoeff();
    const Vector slack = prob.G * sol.y - prob.rhs;
    r.primal = std::max(0.0, slack.maxCoeff());
    r.complementarity = sol.duals.cwiseProduct(slack).cwiseAbs().maxCoeff();
    r.dual_sign = std::max(0.0, -sol.duals.minCoeff());
  }
  r.stationarity = station.size() > 0 ? station.cwiseAbs().maxCoeff() : 0.0;
  const auto inf = [](const Vector& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; };
  r.scale = 1.0 + inf(prob.c) + inf(prob.rhs) + inf(hy2) + gt_scale + gy_scale;
  return r;
}

std::vector<int> zero_rows(const Matrix& g) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (g.cols() == 0 || (g.row(i).array() == 0.0).all()) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

QpSolution set_free_duals_to_zero(QpSolution sol, std::span<const int> free_rows) {
  for (int i : free_rows) {
    if (i >= 0 && i < sol.duals.size()) sol.duals(i) = 0.0;
  }
  std::erase_if(sol.active_set, [&](int i) {
    return std::find(free_rows.begin(), free_rows.end(), i) != free_rows.end();
  });
  return sol;
}

namespace {

enum class RunOutcome { Optimal, Unbounded, Stopped };

struct ActiveSetState {
  Vector y;
  std::vector<int> working;  // insertion order
  Vector multipliers;        // aligned with `working` at optimality
  int iterations = 0;
};

// One primal active-set run from a feasible point. `stop` is checked after each
// step and ends the run early (phase 1 stops as soon as it is feasible).
template <class StopFn>
RunOutcome run_active_set(const Matrix& h, const Vector& c, const Matrix& g, const Vector& rhs,
                          ActiveSetState& st, int max_iter, StopFn stop) {
  const Eigen::Index m = c.size();
  const Eigen::Index rows = rhs.size();
  std::vector<char> in_working(static_cast<std::size_t>(rows), 0);
  for (int i : st.working) in_working[static_cast<std::size_t>(i)] = 1;
  const bool has_h = h.size() > 0 && h.cwiseAbs().maxCoeff() > 0.0;

  Vector grad(m);
  for (; st.iterations < max_iter; ++st.iterations) {
    grad = c;
    if (has_h) grad.noalias() += 2.0 * h * st.y;
    const double grad_scale = 1.0 + (m > 0 ? grad.cwiseAbs().maxCoeff() : 0.0);

    const Eigen::Index w = static_cast<Eigen::Index>(st.working.size());
    Matrix gw(w, m);
    for (Eigen::Index r = 0; r < w; ++r) gw.row(r) = g.row(st.working[static_cast<std::size_t>(r)]);

    Eigen::HouseholderQR<Matrix> qr;
    Matrix z;
    if (w == 0) {
      z = Matrix::Identity(m, m);
    } else {
      qr.compute(gw.transpose());
      const Matrix q_full = qr.householderQ() * Matrix::Identity(m, m);
      z = q_full.rightCols(m - w);
    }

    Vector p = Vector::Zero(m);
    bool ray = false;
    if (z.cols() > 0) {
      const Vector gz = z.transpose() * grad;
      if (has_h) {
        const Matrix hr = 2.0 * z.transpose() * h * z;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(hr);
        if (eig.info() != Eigen::Success) {
          throw Error(ErrorCode::NumericalFailure, "reduced Hessian eigen-decomposition failed");
        }
        const Vector& ev = eig.eigenvalues();
        const Matrix& v = eig.eigenvectors();
        const double ctol = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        const Vector a = v.transpose() * gz;
        Vector u_flat = Vector::Zero(z.cols());
        Vector u_newton = Vector::Zero(z.cols());
        double flat_norm = 0.0;
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
          if (ev(j) <= ctol) {
            u_flat -= a(j) * v.col(j);
            flat_norm = std::max(flat_norm, std::abs(a(j)));
          } else {
            u_newton -= (a(j) / ev(j)) * v.col(j);
          }
        }
        if (flat_norm > 1e-10 * grad_scale) {
          p = z * u_flat;
          ray = true;
        } else {
          p = z * u_newton;
        }
      } else {
        if (gz.cwiseAbs().maxCoeff() > 1e-12 * grad_scale) {
          p = -(z * gz);
          ray = true;
        }
      }
    }

    const double y_scale = 1.0 + (m > 0 ? st.y.cwiseAbs().maxCoeff() : 0.0);
    if (!ray && (m == 0 || p.cwiseAbs().maxCoeff() <= 1e-13 * y_scale)) {
      if (w == 0) {
        st.multipliers.resize(0);
        return RunOutcome::Optimal;
      }
      st.multipliers = qr.solve(Vector(-grad));
      const double dual_tol = 1e-10 * grad_scale;
      Eigen::Index drop = -1;
      double most_negative = -dual_tol;
      for (Eigen::Index r = 0; r < w; ++r) {
        const double lam = st.multipliers(r);
        const bool tie = drop >= 0 && std::abs(lam - most_negative) <= 1e-12 * grad_scale &&
                         st.working[static_cast<std::size_t>(r)] <
                             st.working[static_cast<std::size_t>(drop)];
        if (lam < most_negative - 1e-12 * grad_scale || (lam < -dual_tol && tie)) {
          most_negative = std::min(most_negative, lam);
          drop = r;
        }
      }
      if (drop < 0) return RunOutcome::Optimal;
      in_working[static_cast<std::size_t>(st.working[static_cast<std::size_t>(drop)])] = 0;
      st.working.erase(st.working.begin() + drop);
      continue;
    }

    // Ratio test against rows outside the working set.
    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int block = -1;
    const double p_norm = p.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double gp = g.row(i).dot(p);
      if (gp <= 1e-13 * (1.0 + g.row(i).cwiseAbs().maxCoeff()) * p_norm) continue;
      const double slack = std::max(0.0, rhs(i) - g.row(i).dot(st.y));
      const double a = slack / gp;
      if (a < alpha) {
        alpha = a;
        block = static_cast<int>(i);
      }
    }
    if (!std::isfinite(alpha)) return RunOutcome::Unbounded;
    st.y += alpha * p;
    if (block >= 0) {
      st.working.push_back(block);
      in_working[static_cast<std::size_t>(block)] = 1;
    }
    if (stop(st.y)) {
      ++st.iterations;
      return RunOutcome::Stopped;
    }
  }
  throw Error(ErrorCode::MaxIterations, "active-set iteration limit reached");
}

double max_violation(const Matrix& g, const Vector& rhs, const Vector& y) {
  if (rhs.size() == 0) return -std::numeric_limits<double>::infinity();
  return (g * y - rhs).maxCoeff();
}

// Equality-constrained minimizer on the candidate working set, or nothing.
bool try_warm_start(const QpProblem& prob, std::span<const int> warm, ActiveSetState& st,
                    double feas_tol) {
  const Eigen::Index m = prob.num_vars();
  std::vector<int> rows;
  for (int i : warm) {
    if (i >= 0 && i < prob.num_rows() && std::find(rows.begin(), rows.end(), i) == rows.end()) {
      rows.push_back(i);
    }
  }
  std::sort(rows.begin(), rows.end());
  const Eigen::Index w = static_cast<Eigen::Index>(rows.size());
  if (w == 0 || w > m) return false;
  Matrix gw(w, m);
  Vector bw(w);
  for (Eigen::Index r = 0; r < w; ++r) {
    gw.row(r) = prob.G.row(rows[static_cast<std::size_t>(r)]);
    bw(r) = prob.rhs(rows[static_cast<std::size_t>(r)]);
  }
  Eigen::ColPivHouseholderQR<Matrix> rank_qr(gw.transpose());
  if (rank_qr.rank() < w) return false;
  Eigen::HouseholderQR<Matrix> qr(gw.transpose());
  const Matrix q_full = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix r_top = qr.matrixQR().topRows(w).triangularView<Eigen::Upper>();
  // Min-norm point on {gw y = bw}: y0 = Q1 R^{-T} bw.
  const Vector t = r_top.transpose().triangularView<Eigen::Lower>().solve(bw);
  Vector y = q_full.leftCols(w) * t;
  if (w < m) {
    const Matrix z = q_full.rightCols(m - w);
    const Matrix hr = 2.0 * z.transpose() * prob.H * z;
    Eigen::LLT<Matrix> llt(hr);
    if (llt.info() != Eigen::Success) return false;
    const Vector grad = 2.0 * prob.H * y + prob.c;
    y -= z * llt.solve(Vector(z.transpose() * grad));
  }
  if (max_violation(prob.G, prob.rhs, y) > feas_tol) return false;
  st.y = std::move(y);
  st.working = std::move(rows);
  return true;
}

}  // namespace

QpSolution solve_qp(const QpProblem& prob, std::span<const int> warm_start) {
  const Eigen::Index m = prob.num_vars();
  const Eigen::Index rows = prob.num_rows();
  if (prob.H.rows() != m || prob.H.cols() != m || prob.G.rows() != rows ||
      (rows > 0 && prob.G.cols() != m)) {
    throw Error(ErrorCode::DimensionMismatch, "QpProblem dimensions are inconsistent");
  }
  const double data_scale = 1.0 + (rows > 0 ? prob.rhs.cwiseAbs().maxCoeff() : 0.0) +
                            (rows > 0 && m > 0 ? prob.G.cwiseAbs().maxCoeff() : 0.0);
  const double feas_tol = 1e-10 * data_scale;
  // Phase 1 may stop slightly short of zero; that residual is accepted.
  const double infeas_tol = 1e-9 * data_scale;
  const int max_iter = 50 * static_cast<int>(std::max<Eigen::Index>(m + rows, 1)) + 50;

  QpSolution sol;
  ActiveSetState st;
  st.y = Vector::Zero(m);

  if (!try_warm_start(prob, warm_start, st, feas_tol)) {
    st.y = Vector::Zero(m);
    st.working.clear();
    const double viol = max_violation(prob.G, prob.rhs, st.y);
    if (viol > feas_tol) {
      // Phase 1: min s  s.t.  G y - s <= rhs,  s >= -1.
      Matrix g1(rows + 1, m + 1);
      g1.topLeftCorner(rows, m) = prob.G;
      g1.topRightCorner(rows, 1).setConstant(-1.0);
      g1.bottomRows(1).setZero();
      g1(rows, m) = -1.0;
      Vector rhs1(rows + 1);
      rhs1.head(rows) = prob.rhs;
      rhs1(rows) = 1.0;
      Vector c1 = Vector::Zero(m + 1);
      c1(m) = 1.0;
      ActiveSetState p1;
      p1.y = Vector::Zero(m + 1);
      p1.y(m) = viol;
      const Matrix h1(0, 0);
      const auto outcome = run_active_set(h1, c1, g1, rhs1, p1, max_iter,
                                          [&](const Vector& v) { return v(m) <= 0.0; });
      sol.iterations += p1.iterations;
      if (outcome != RunOutcome::Stopped && p1.y(m) > infeas_tol) {
        sol.status = QpStatus::Infeasible;
        sol.y = p1.y.head(m);
        sol.duals = Vector::Zero(rows);
        sol.farkas = Vector::Zero(rows);
        for (std::size_t r = 0; r < p1.working.size(); ++r) {
          const int row = p1.working[r];
          if (row < rows && r < static_cast<std::size_t>(p1.multipliers.size())) {
            sol.farkas(row) = std::max(0.0, p1.multipliers(static_cast<Eigen::Index>(r)));
          }
        }
        sol.objective = std::numeric_limits<double>::infinity();
        return sol;
      }
      st.y = p1.y.head(m);
    }
  }

  const auto outcome = run_active_set(prob.H, prob.c, prob.G, prob.rhs, st, max_iter,
                                      [](const Vector&) { return false; });
  sol.iterations += st.iterations;
  sol.y = st.y;
  sol.duals = Vector::Zero(rows);
  if (outcome == RunOutcome::Unbounded) {
    sol.status = QpStatus::Unbounded;
    sol.objective = -std::numeric_limits<double>::infinity();
    return sol;
  }
  for (std::size_t r = 0; r < st.working.size(); ++r) {
    const double lam = r < static_cast<std::size_t>(st.multipliers.size())
                           ? st.multipliers(static_cast<Eigen::Index>(r))
                           : 0.0;
    sol.duals(st.working[r]) = std::max(0.0, lam);
  }
  sol.active_set = st.working;
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.status = QpStatus::Optimal;
  sol.objective = sol.y.dot(prob.H * sol.y) + prob.c.dot(sol.y);
  return sol;
}

}  // namespace miqp
