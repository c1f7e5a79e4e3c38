#include "miqp/lp.hpp"

#include <algorithm>
#include <cmath>

#include "miqp/error.hpp"

namespace miqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
// Entering candidates need |alpha| above this fraction of the row maximum.
constexpr double kRelPivotTol = 1e-7;
constexpr int kRefactorEvery = 100;

}  // namespace

DualSimplex::DualSimplex(Vector lower, Vector upper, Vector cost) {
  n_ = static_cast<int>(lower.size());
  if (upper.size() != n_ || cost.size() != n_) {
    throw Error(ErrorCode::DimensionMismatch, "bounds and cost must have equal length");
  }
  lower_.assign(lower.data(), lower.data() + n_);
  upper_.assign(upper.data(), upper.data() + n_);
  cost_.assign(cost.data(), cost.data() + n_);
  value_.assign(static_cast<std::size_t>(n_), 0.0);
  basic_.assign(static_cast<std::size_t>(n_), 0);
  where_.resize(static_cast<std::size_t>(n_));
  nonbasic_.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    nonbasic_[static_cast<std::size_t>(j)] = j;
    where_[static_cast<std::size_t>(j)] = j;
  }
  d_ = cost;
  tab_.resize(0, n_);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
}

bool DualSimplex::is_free(int var) const {
  return std::isinf(lower_[static_cast<std::size_t>(var)]) &&
         std::isinf(upper_[static_cast<std::size_t>(var)]);
}

bool DualSimplex::is_fixed(int var) const {
  return lower_[static_cast<std::size_t>(var)] == upper_[static_cast<std::size_t>(var)];
}

void DualSimplex::ensure_capacity(int rows) {
  if (tab_.rows() >= rows) return;
  const Eigen::Index cap = std::max<Eigen::Index>({rows, 2 * tab_.rows(), 16});
  tab_.conservativeResize(cap, n_);
}

// Moves a nonbasic variable to the bound its reduced cost asks for and
// propagates the change to the basic values.
void DualSimplex::place_nonbasic(int col) {
  const int var = nonbasic_[static_cast<std::size_t>(col)];
  const double lo = lower_[static_cast<std::size_t>(var)];
  const double up = upper_[static_cast<std::size_t>(var)];
  const double old = value_[static_cast<std::size_t>(var)];
  const double d = d_(col);
  double target;
  if (lo == up) {
    target = lo;
  } else if (d > kDualTol) {
    if (std::isinf(lo)) {
      dual_trouble_ = true;
      return;
    }
    target = lo;
  } else if (d < -kDualTol) {
    if (std::isinf(up)) {
      dual_trouble_ = true;
      return;
    }
    target = up;
  } else if (old == lo || old == up) {
    target = old;
  } else if (!std::isinf(lo) && (std::isinf(up) || std::abs(old - lo) <= std::abs(old - up))) {
    target = lo;
  } else if (!std::isinf(up)) {
    target = up;
  } else {
    target = old;  // free variable stays where it is
  }
  const double delta = target - old;
  if (delta == 0.0) return;
  value_[static_cast<std::size_t>(var)] = target;
  for (int i = 0; i < m_; ++i) {
    value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= tab_(i, col) * delta;
  }
}

int DualSimplex::add_row(const std::vector<Entry>& entries, double rhs) {
  ensure_capacity(m_ + 1);
  const int r = m_;
  const int slack = n_ + r;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_);
  double activity = 0.0;
  for (const auto& [j, a] : entries) {
    if (j < 0 || j >= n_) throw Error(ErrorCode::DimensionMismatch, "row entry out of range");
    activity += a * value_[static_cast<std::size_t>(j)];
    const int w = where_[static_cast<std::size_t>(j)];
    if (basic_[static_cast<std::size_t>(j)]) {
      row.noalias() -= a * tab_.row(w);
    } else {
      row(w) += a;
    }
  }
  tab_.row(r) = row;
  rows_.push_back(entries);
  rhs_.push_back(rhs);
  lower_.push_back(0.0);
  upper_.push_back(kInf);
  cost_.push_back(0.0);
  value_.push_back(rhs - activity);
  basic_.push_back(1);
  where_.push_back(r);
  basis_.push_back(slack);
  ++m_;
  return r;
}

void DualSimplex::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= n_ + m_) throw Error(ErrorCode::DimensionMismatch, "variable out of range");
  if (lower > upper) throw Error(ErrorCode::InvalidArgument, "lower bound exceeds upper bound");
  lower_[static_cast<std::size_t>(var)] = lower;
  upper_[static_cast<std::size_t>(var)] = upper;
  if (!basic_[static_cast<std::size_t>(var)]) place_nonbasic(where_[static_cast<std::size_t>(var)]);
}

void DualSimplex::pivot(int r, int k, double leaving_target) {
  const int leave = basis_[static_cast<std::size_t>(r)];
  const int enter = nonbasic_[static_cast<std::size_t>(k)];
  const double p = tab_(r, k);
  const double step = (value_[static_cast<std::size_t>(leave)] - leaving_target) / p;

  auto t = tab_.topRows(m_);
  const Vector col = t.col(k);
  for (int i = 0; i < m_; ++i) {
    value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= col(i) * step;
  }
  value_[static_cast<std::size_t>(enter)] += step;
  value_[static_cast<std::size_t>(leave)] = leaving_target;

  const Eigen::RowVectorXd row = t.row(r) / p;
  t.noalias() -= col * row;
  t.row(r) = row;
  t.col(k) = -col / p;
  t(r, k) = 1.0 / p;

  const double dk = d_(k);
  d_ -= dk * row.transpose();
  d_(k) = -dk / p;

  basis_[static_cast<std::size_t>(r)] = enter;
  nonbasic_[static_cast<std::size_t>(k)] = leave;
  basic_[static_cast<std::size_t>(enter)] = 1;
  basic_[static_cast<std::size_t>(leave)] = 0;
  where_[static_cast<std::size_t>(enter)] = r;
  where_[static_cast<std::size_t>(leave)] = k;
  ++since_refactor_;
}

void DualSimplex::crash_free_variables() {
  for (int k = 0; k < n_; ++k) {
    const int var = nonbasic_[static_cast<std::size_t>(k)];
    if (!is_free(var) || m_ == 0) continue;
    int best = -1;
    double best_abs = kPivotTol;
    for (int r = 0; r < m_; ++r) {
      if (is_free(basis_[static_cast<std::size_t>(r)])) continue;
      const double a = std::abs(tab_(r, k));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best < 0) continue;
    const int leave = basis_[static_cast<std::size_t>(best)];
    const double lo = lower_[static_cast<std::size_t>(leave)];
    pivot(best, k, std::isinf(lo) ? upper_[static_cast<std::size_t>(leave)] : lo);
  }
}

// B = [G(:, Sb) | I(:, Rs)] where Sb are the basic structurals and Rs the
// rows with a basic slack. With Rn the other rows, only K = G(Rn, Sb) needs a
// factorisation: B^{-1} a = (K^{-1} a_Rn, a_Rs - G(Rs, Sb) K^{-1} a_Rn).
bool DualSimplex::refactor() {
  ++refactors_;
  since_refactor_ = 0;
  dual_trouble_ = false;
  if (m_ == 0) return true;
  Matrix g = Matrix::Zero(m_, n_);
  for (int r = 0; r < m_; ++r) {
    for (const auto& [j, a] : rows_[static_cast<std::size_t>(r)]) g(r, j) += a;
  }
  std::vector<int> sb_pos, rs_pos, rn_rows, rs_rows;
  std::vector<int> rn_index(static_cast<std::size_t>(m_), -1);
  for (int r = 0; r < m_; ++r) {
    if (!basic_[static_cast<std::size_t>(n_ + r)]) {
      rn_index[static_cast<std::size_t>(r)] = static_cast<int>(rn_rows.size());
      rn_rows.push_back(r);
    }
  }
  for (int i = 0; i < m_; ++i) {
    const int var = basis_[static_cast<std::size_t>(i)];
    if (var < n_) {
      sb_pos.push_back(i);
    } else {
      rs_pos.push_back(i);
      rs_rows.push_back(var - n_);
    }
  }
  const int q = static_cast<int>(sb_pos.size());
  const int ns = static_cast<int>(rs_rows.size());
  if (static_cast<int>(rn_rows.size()) != q) {
    return false;
  }
  Matrix k(q, q), g_rs(ns, q);
  for (int c = 0; c < q; ++c) {
    const int var = basis_[static_cast<std::size_t>(sb_pos[static_cast<std::size_t>(c)])];
    for (int a = 0; a < q; ++a) k(a, c) = g(rn_rows[static_cast<std::size_t>(a)], var);
    for (int a = 0; a < ns; ++a) g_rs(a, c) = g(rs_rows[static_cast<std::size_t>(a)], var);
  }
  Eigen::PartialPivLU<Matrix> lu;
  if (q > 0) {
    lu.compute(k);
    if (!(lu.rcond() > 1e-12)) return false;
  }

  // Nonbasic columns restricted to Rn and Rs, and w = rhs - N x_N.
  Matrix n_rn = Matrix::Zero(q, n_), n_rs = Matrix::Zero(ns, n_);
  Vector w = Eigen::Map<const Vector>(rhs_.data(), m_);
  for (int j = 0; j < n_; ++j) {
    const int var = nonbasic_[static_cast<std::size_t>(j)];
    const double xv = value_[static_cast<std::size_t>(var)];
    if (var < n_) {
      for (int a = 0; a < q; ++a) n_rn(a, j) = g(rn_rows[static_cast<std::size_t>(a)], var);
      for (int a = 0; a < ns; ++a) n_rs(a, j) = g(rs_rows[static_cast<std::size_t>(a)], var);
      if (xv != 0.0) w -= xv * g.col(var);
    } else {
      n_rn(rn_index[static_cast<std::size_t>(var - n_)], j) = 1.0;
      w(var - n_) -= xv;
    }
  }
  Vector w_rn(q), w_rs(ns);
  for (int a = 0; a < q; ++a) w_rn(a) = w(rn_rows[static_cast<std::size_t>(a)]);
  for (int a = 0; a < ns; ++a) w_rs(a) = w(rs_rows[static_cast<std::size_t>(a)]);

  Matrix x_s(q, n_);
  Vector xb_s(q);
  if (q > 0) {
    x_s = lu.solve(n_rn);
    xb_s = lu.solve(w_rn);
  }
  const Matrix t_rs = n_rs - g_rs * x_s;
  const Vector xb_rs = w_rs - g_rs * xb_s;
  for (int c = 0; c < q; ++c) {
    const int pos = sb_pos[static_cast<std::size_t>(c)];
    tab_.row(pos) = x_s.row(c);
    value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(pos)])] = xb_s(c);
  }
  for (int a = 0; a < ns; ++a) {
    const int pos = rs_pos[static_cast<std::size_t>(a)];
    tab_.row(pos) = t_rs.row(a);
    value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(pos)])] = xb_rs(a);
  }

  // B^T pi = c_B: pi_Rs is the slack cost, K^T pi_Rn = c_Sb - G(Rs, Sb)^T pi_Rs.
  Vector pi = Vector::Zero(m_);
  Vector pi_rs(ns);
  for (int a = 0; a < ns; ++a) {
    pi_rs(a) = cost_[static_cast<std::size_t>(n_ + rs_rows[static_cast<std::size_t>(a)])];
    pi(rs_rows[static_cast<std::size_t>(a)]) = pi_rs(a);
  }
  if (q > 0) {
    Vector cs(q);
    for (int c = 0; c < q; ++c) {
      cs(c) = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(sb_pos[static_cast<std::size_t>(c)])])];
    }
    const Vector pi_rn = lu.transpose().solve(Vector(cs - g_rs.transpose() * pi_rs));
    for (int a = 0; a < q; ++a) pi(rn_rows[static_cast<std::size_t>(a)]) = pi_rn(a);
  }
  for (int j = 0; j < n_; ++j) {
    const int var = nonbasic_[static_cast<std::size_t>(j)];
    const double aj_pi = var < n_ ? g.col(var).dot(pi) : pi(var - n_);
    d_(j) = cost_[static_cast<std::size_t>(var)] - aj_pi;
  }
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  return true;
}

// The all-slack basis is dual feasible whenever every variable with a
// nonzero cost has the matching finite bound (the class contract).
void DualSimplex::reset_basis() {
  ++resets_;
  for (int j = 0; j < n_; ++j) {
    basic_[static_cast<std::size_t>(j)] = 0;
    nonbasic_[static_cast<std::size_t>(j)] = j;
    where_[static_cast<std::size_t>(j)] = j;
  }
  for (int r = 0; r < m_; ++r) {
    basic_[static_cast<std::size_t>(n_ + r)] = 1;
    basis_[static_cast<std::size_t>(r)] = n_ + r;
    where_[static_cast<std::size_t>(n_ + r)] = r;
  }
  dual_trouble_ = false;
  refactor();
  if (dual_trouble_) throw Error(ErrorCode::NumericalFailure, "slack basis is not dual feasible");
  crash_free_variables();
}

void DualSimplex::refresh() {
  if (!refactor() || dual_trouble_) reset_basis();
}

int DualSimplex::choose_leaving() const {
  int best = -1;
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int var = basis_[static_cast<std::size_t>(i)];
    const double v = value_[static_cast<std::size_t>(var)];
    const double lo = lower_[static_cast<std::size_t>(var)];
    const double up = upper_[static_cast<std::size_t>(var)];
    double infeas = 0.0;
    if (v < lo - kPrimalTol * (1.0 + std::abs(lo))) infeas = lo - v;
    else if (v > up + kPrimalTol * (1.0 + std::abs(up))) infeas = v - up;
    if (infeas <= 0.0) continue;
    if (bland_) {
      // Smallest variable index among the infeasible basics.
      if (best < 0 || var < basis_[static_cast<std::size_t>(best)]) best = i;
    } else if (infeas > worst) {
      worst = infeas;
      best = i;
    }
  }
  return best;
}

bool DualSimplex::ok_sign(int var, double d) const {
  const double v = value_[static_cast<std::size_t>(var)];
  const bool at_lower = v == lower_[static_cast<std::size_t>(var)];
  const bool at_upper = v == upper_[static_cast<std::size_t>(var)];
  if (at_lower && !at_upper) return d >= 0.0;
  if (at_upper && !at_lower) return d <= 0.0;
  return true;
}

int DualSimplex::choose_entering(int r, bool increase) const {
  const auto row = tab_.row(r).head(n_);
  const double tol = std::max(kPivotTol, kRelPivotTol * row.cwiseAbs().maxCoeff());
  // Harris two-pass ratio test.
  std::vector<std::pair<int, double>> eligible;  // (column, |d| / |a|)
  double theta_max = kInf;
  for (int j = 0; j < n_; ++j) {
    const int var = nonbasic_[static_cast<std::size_t>(j)];
    if (is_fixed(var)) continue;
    const double a = row(j);
    if (std::abs(a) <= tol) continue;
    const double v = value_[static_cast<std::size_t>(var)];
    const bool at_lower = v == lower_[static_cast<std::size_t>(var)];
    const bool at_upper = v == upper_[static_cast<std::size_t>(var)];
    bool ok;
    if (at_lower && !at_upper) ok = increase ? a < 0 : a > 0;
    else if (at_upper && !at_lower) ok = increase ? a > 0 : a < 0;
    else ok = true;  // free, or sitting strictly inside its bounds
    if (!ok) continue;
    // A reduced cost of the wrong sign (within tolerance) counts as zero.
    const double d = ok_sign(var, d_(j)) ? std::abs(d_(j)) : 0.0;
    const double ratio = d / std::abs(a);
    eligible.emplace_back(j, ratio);
    theta_max = std::min(theta_max, (d + kDualTol) / std::abs(a));
  }
  int best = -1;
  double best_abs = 0.0;
  if (bland_) {
    // Exact minimum ratio, ties to the smallest variable index.
    double theta = kInf;
    for (const auto& [j, ratio] : eligible) theta = std::min(theta, ratio);
    for (const auto& [j, ratio] : eligible) {
      if (ratio > theta + 1e-12 * (1.0 + theta)) continue;
      if (best < 0 || nonbasic_[static_cast<std::size_t>(j)] < nonbasic_[static_cast<std::size_t>(best)]) best = j;
    }
    return best;
  }
  for (const auto& [j, ratio] : eligible) {
    if (ratio > theta_max) continue;
    const double a = std::abs(row(j));
    if (a > best_abs) {
      best_abs = a;
      best = j;
    }
  }
  return best;
}

LpStatus DualSimplex::solve(Clock::time_point deadline) {
  if (dual_trouble_) refresh();
  crash_free_variables();
  const long limit = iterations_ + 5000 + 50L * (m_ + n_);
  bool fresh = false;
  bland_ = false;
  int stalled = 0;
  double last_obj = objective();
  for (;;) {
    if (since_refactor_ >= kRefactorEvery) {
      refresh();
      fresh = true;
    }
    const int r = choose_leaving();
    if (r < 0) {
      double scale = 1.0;
      for (double v : rhs_) scale = std::max(scale, std::abs(v));
      if (!fresh && (primal_residual() > 1e-9 * scale || dual_infeasibility() > 1e-7)) {
        refresh();
        fresh = true;
        continue;
      }
      return LpStatus::Optimal;
    }
    const int var = basis_[static_cast<std::size_t>(r)];
    const bool increase = value_[static_cast<std::size_t>(var)] < lower_[static_cast<std::size_t>(var)];
    const int k = choose_entering(r, increase);
    if (k < 0) {
      if (!fresh) {
        refresh();
        fresh = true;
        continue;
      }
      return LpStatus::Infeasible;
    }
    pivot(r, k, increase ? lower_[static_cast<std::size_t>(var)] : upper_[static_cast<std::size_t>(var)]);
    fresh = false;
    ++iterations_;
    // Dual degeneracy is the norm here (most reduced costs start at zero), so
    // after a run of pivots without objective progress use Bland's rule until
    // the objective moves again.
    const double obj = objective();
    if (obj > last_obj + 1e-12 * (1.0 + std::abs(last_obj))) {
      stalled = 0;
      bland_ = false;
    } else if (++stalled > 30) {
      bland_ = true;
    }
    last_obj = std::max(last_obj, obj);
    if (iterations_ >= limit) return LpStatus::IterationLimit;
    if (iterations_ % 64 == 0 && Clock::now() >= deadline) return LpStatus::TimeLimit;
  }
}

Vector DualSimplex::primal() const {
  return Eigen::Map<const Vector>(value_.data(), n_);
}

double DualSimplex::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += cost_[static_cast<std::size_t>(j)] * value_[static_cast<std::size_t>(j)];
  return z;
}

double DualSimplex::dual_infeasibility() const {
  double worst = 0.0;
  for (int j = 0; j < n_; ++j) {
    const int var = nonbasic_[static_cast<std::size_t>(j)];
    if (is_fixed(var)) continue;
    const double v = value_[static_cast<std::size_t>(var)];
    const double d = d_(j);
    const bool at_lower = v == lower_[static_cast<std::size_t>(var)];
    const bool at_upper = v == upper_[static_cast<std::size_t>(var)];
    if (at_lower && !at_upper) worst = std::max(worst, -d);
    else if (at_upper && !at_lower) worst = std::max(worst, d);
    else if (!at_lower && !at_upper) worst = std::max(worst, std::abs(d));
  }
  return worst;
}

double DualSimplex::primal_residual() const {
  double worst = 0.0;
  for (int r = 0; r < m_; ++r) {
    double act = value_[static_cast<std::size_t>(n_ + r)];
    for (const auto& [j, a] : rows_[static_cast<std::size_t>(r)]) act += a * value_[static_cast<std::size_t>(j)];
    worst = std::max(worst, std::abs(act - rhs_[static_cast<std::size_t>(r)]));
  }
  return worst;
}

}  // namespace miqp
