#include "miqp/master.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "miqp/error.hpp"
#include "miqp/tolerances.hpp"

namespace miqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DualSimplex make_lp(int n, double eta_lb) {
  Vector lower(2 * n + 1), upper(2 * n + 1), cost = Vector::Zero(2 * n + 1);
  lower.head(n).setZero();
  upper.head(n).setOnes();
  lower.segment(n, n).setConstant(-kInf);
  upper.segment(n, n).setConstant(kInf);
  lower(2 * n) = eta_lb;
  upper(2 * n) = kInf;
  cost(2 * n) = 1.0;
  return DualSimplex(lower, upper, cost);
}

}  // namespace

MasterProblem::MasterProblem(const MiqpInstance& inst, double eta_lb)
    : n_(inst.n), eta_lb_(eta_lb), lp_(make_lp(inst.n, std::isfinite(eta_lb) ? eta_lb : 0.0)) {
  if (!std::isfinite(eta_lb)) {
    throw Error(ErrorCode::InvalidArgument, "the master needs a finite lower bound on eta");
  }
  using Entry = DualSimplex::Entry;
  for (int r = 0; r < inst.A.outerSize(); ++r) {
    std::vector<Entry> row;
    for (SparseMatrix::InnerIterator it(inst.A, r); it; ++it) row.emplace_back(n_ + it.col(), it.value());
    lp_.add_row(row, inst.b(r));
  }
  for (int r = 0; r < inst.C.outerSize(); ++r) {
    std::vector<Entry> row;
    for (SparseMatrix::InnerIterator it(inst.C, r); it; ++it) row.emplace_back(n_ + it.col(), it.value());
    for (SparseMatrix::InnerIterator it(inst.D, r); it; ++it) row.emplace_back(it.col(), -it.value());
    lp_.add_row(row, 0.0);
  }
  if (inst.k) {
    std::vector<Entry> row;
    for (int j = 0; j < n_; ++j) row.emplace_back(j, 1.0);
    lp_.add_row(row, *inst.k);
  }
}

void MasterProblem::raise_eta_lb(double value) {
  if (value > eta_lb_) {
    eta_lb_ = value;
    lp_.set_bounds(eta_index(), value, kInf);
  }
}

void MasterProblem::add_cut(const Cut& cut) {
  // Stored scaled to unit max coefficient.
  const double scale = 1.0 / std::max(1.0, cut.t.cwiseAbs().maxCoeff());
  std::vector<DualSimplex::Entry> row;
  for (int j = 0; j < n_; ++j) {
    if (cut.t(j) != 0.0) row.emplace_back(j, scale * cut.t(j));
  }
  row.emplace_back(eta_index(), -scale);
  lp_.add_row(row, -scale * cut.offset);
  ++cut_rows_;
}

void MasterProblem::add_no_good(const Vector& x_binary) {
  std::vector<DualSimplex::Entry> row;
  double ones = 0.0;
  for (int j = 0; j < n_; ++j) {
    const bool one = x_binary(j) > 0.5;
    row.emplace_back(j, one ? 1.0 : -1.0);
    ones += one ? 1.0 : 0.0;
  }
  lp_.add_row(row, ones - 1.0);
  ++cut_rows_;
}

bool inject_incumbent(MasterProblem& master, const Vector& x, double value, const Vector& y) {
  if (!(value < master.incumbent.value)) return false;
  master.incumbent.value = value;
  master.incumbent.x = x;
  master.incumbent.y = y;
  return true;
}

double relative_gap(double upper, double lower) {
  if (!std::isfinite(upper)) return kInf;
  return (upper - lower) / std::max(1.0, std::abs(upper));
}

LpOutcome solve_lp(MasterProblem& master, const NodeRecord& node,
                   DualSimplex::Clock::time_point deadline) {
  const int n = master.n();
  std::vector<signed char> fix(static_cast<std::size_t>(n), -1);
  for (int j : node.fixed0) fix[static_cast<std::size_t>(j)] = 0;
  for (int j : node.fixed1) {
    if (fix[static_cast<std::size_t>(j)] == 0) {
      throw Error(ErrorCode::InvalidArgument, "variable fixed to both 0 and 1");
    }
    fix[static_cast<std::size_t>(j)] = 1;
  }
  DualSimplex& lp = master.lp();
  for (int j = 0; j < n; ++j) {
    const double lo = fix[static_cast<std::size_t>(j)] == 1 ? 1.0 : 0.0;
    const double up = fix[static_cast<std::size_t>(j)] == 0 ? 0.0 : 1.0;
    if (lp.lower(j) != lo || lp.upper(j) != up) lp.set_bounds(j, lo, up);
  }
  LpOutcome out;
  out.status = lp.solve(deadline);
  if (out.status == LpStatus::IterationLimit) {
    throw Error(ErrorCode::MaxIterations, "master LP iteration limit reached");
  }
  if (out.status != LpStatus::Optimal) return out;
  const Vector z = lp.primal();
  out.point.x = z.head(n);
  out.point.y = z.segment(n, n);
  out.point.eta = z(2 * n);
  out.objective = lp.objective();
  out.dual_infeasibility = lp.dual_infeasibility();
  return out;
}

BnbResult branch_and_bound(MasterProblem& master, const LazyCallback& callback,
                           const BnbOptions& options) {
  if (!(options.gap_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "gap_tol must be positive");
  using Clock = DualSimplex::Clock;
  const auto start = Clock::now();
  const auto deadline =
      std::isfinite(options.time_limit)
          ? start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.time_limit))
          : Clock::time_point::max();
  const Tolerances& tol = tolerances();
  const int n = master.n();
  const long start_iters = master.lp().iterations();

  BnbResult res;
  std::map<int, NodeRecord> nodes;
  std::set<std::pair<double, int>> open;
  int next_id = 0;
  double closed_min = kInf;

  const auto threshold = [&] {
    const double upper = std::min(master.incumbent.value, options.cutoff);
    if (!std::isfinite(upper)) return kInf;
    return upper - options.gap_tol * std::max(1.0, std::abs(upper));
  };
  const auto push = [&](NodeRecord node) {
    node.id = next_id++;
    open.emplace(node.bound, node.id);
    nodes.emplace(node.id, std::move(node));
  };
  const auto log = [&](const NodeRecord& node) {
    if (!options.node_log) return;
    *options.node_log << node.id << '\t' << node.depth << '\t' << node.bound << '\t'
                      << master.incumbent.value << '\t' << master.num_cut_rows() << '\n';
  };
  if (options.node_log) *options.node_log << "# node\tdepth\tbound\tincumbent\tcuts\n";

  NodeRecord root;
  root.bound = master.eta_lb();
  push(std::move(root));

  bool timed_out = false;
  int plunge = -1;  // child to process next, bypassing best-bound order
  double current_bound = kInf;  // bound of the node being processed at a timeout
  while (!open.empty()) {
    if (Clock::now() >= deadline) {
      timed_out = true;
      break;
    }
    const bool plunging = plunge >= 0;
    const int id = plunging ? plunge : open.begin()->second;
    plunge = -1;
    NodeRecord node = std::move(nodes.at(id));
    nodes.erase(id);
    open.erase({node.bound, id});
    const double top_bound = node.bound;

    if (plunging && top_bound >= threshold()) {
      closed_min = std::min(closed_min, top_bound);
      continue;
    }
    if (top_bound >= threshold()) {
      // Best-bound order: every remaining node is at least as bad.
      closed_min = std::min(closed_min, top_bound);
      for (const auto& [b, _] : open) closed_min = std::min(closed_min, b);
      open.clear();
      nodes.clear();
      break;
    }

    ++res.nodes;
    const double parent_bound = node.bound;
    bool done = false;
    int node_rounds = 0;
    bool heuristic_due = options.heuristic &&
                         (res.nodes == 1 || (options.heuristic_every > 0 && res.nodes % options.heuristic_every == 0));
    for (int resolve = 0; !done; ++resolve) {
      if (resolve > 10000) throw Error(ErrorCode::MaxIterations, "node re-solve limit reached");
      const LpOutcome lp = solve_lp(master, node, deadline);
      if (lp.status == LpStatus::TimeLimit) {
        timed_out = true;
        current_bound = node.bound;
        break;
      }
      if (lp.status == LpStatus::Infeasible) {
        node.status = NodeStatus::Infeasible;
        done = true;
        break;
      }
      res.max_dual_infeasibility = std::max(res.max_dual_infeasibility, lp.dual_infeasibility);
      if (resolve == 0 && node.parent >= 0) {
        res.min_bound_step = std::min(res.min_bound_step, lp.objective - parent_bound);
      }
      node.bound = std::max(node.bound, lp.objective);
      if (node.bound >= threshold()) {
        node.status = NodeStatus::PrunedByBound;
        closed_min = std::min(closed_min, node.bound);
        done = true;
        break;
      }

      int branch = -1;
      double most = tol.integrality;
      for (int j = 0; j < n; ++j) {
        const double f = lp.point.x(j) - std::floor(lp.point.x(j));
        const double frac = std::min(f, 1.0 - f);
        if (frac > most) {
          most = frac;
          branch = j;
        }
      }

      if (branch < 0) {
        Vector xb = lp.point.x.array().round();
        const LazyReply reply = callback(xb, lp.point);
        if (!std::isfinite(reply.value)) {
          master.add_no_good(xb);
          ++res.cuts_added;
          continue;
        }
        inject_incumbent(master, xb, reply.value, reply.y);
        if (reply.cut) {
          const double viol = reply.cut->evaluate(lp.point.x) - lp.point.eta;
          if (viol > tol.cut_violation * std::max(1.0, std::abs(reply.value))) {
            master.add_cut(*reply.cut);
            ++res.cuts_added;
            continue;
          }
        }
        node.status = NodeStatus::Integral;
        closed_min = std::min(closed_min, node.bound);
        done = true;
        break;
      }

      if (heuristic_due) {
        heuristic_due = false;
        // Heuristic cuts come from binary points and are always kept: the
        // lazy callback will not regenerate them.
        const std::optional<Cut> cut = options.heuristic(master, lp.point);
        if (cut) {
          master.add_cut(*cut);
          ++res.cuts_added;
          ++res.user_cuts;
          continue;
        }
        if (node.bound >= threshold()) continue;  // re-enter the prune test
      }
      if (options.separate && node_rounds < options.node_cut_rounds) {
        ++node_rounds;
        const std::optional<Cut> cut = options.separate(lp.point);
        if (cut && cut->evaluate(lp.point.x) - lp.point.eta >
                       options.node_cut_violation * std::max(1.0, std::abs(lp.point.eta))) {
          master.add_cut(*cut);
          ++res.cuts_added;
          ++res.user_cuts;
          continue;
        }
      }

      node.status = NodeStatus::Branched;
      NodeRecord up, down;
      up.parent = down.parent = node.id;
      up.depth = down.depth = node.depth + 1;
      up.bound = down.bound = node.bound;
      up.fixed0 = down.fixed0 = node.fixed0;
      up.fixed1 = down.fixed1 = node.fixed1;
      up.fixed1.push_back(branch);
      down.fixed0.push_back(branch);
      const bool go_up = lp.point.x(branch) >= 0.5;
      push(std::move(up));
      push(std::move(down));
      if (options.plunge) plunge = next_id - (go_up ? 2 : 1);
      done = true;
    }
    log(node);
    if (timed_out) break;
  }

  res.lp_iterations = master.lp().iterations() - start_iters;
  double open_min = current_bound;
  for (const auto& [b, _] : open) open_min = std::min(open_min, b);
  res.lower_bound = std::min({open_min, closed_min, master.incumbent.value});
  if (timed_out) {
    res.status = BnbStatus::TimeLimit;
  } else if (!master.incumbent.x) {
    res.status = BnbStatus::Infeasible;
  } else {
    res.status = BnbStatus::Optimal;
  }
  return res;
}

}  // namespace miqp
