#include "miqp/oa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "miqp/error.hpp"
#include "miqp/qp.hpp"
#include "miqp/tolerances.hpp"

namespace miqp {

std::string_view to_string(OaMode m) {
  return m == OaMode::SingleTree ? "single_tree" : "multi_tree";
}

std::string_view to_string(RootBound r) {
  switch (r) {
    case RootBound::QpRelax: return "qp_relax";
    case RootBound::KelleyPersp: return "kelley_persp";
    case RootBound::Explicit: return "explicit";
  }
  return "?";
}

std::string_view to_string(OaStatus s) {
  switch (s) {
    case OaStatus::Optimal: return "optimal";
    case OaStatus::TimeLimit: return "time_limit";
    case OaStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Clock::time_point deadline_after(Clock::time_point t0, double limit) {
  if (!std::isfinite(limit)) return Clock::time_point::max();
  return t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limit));
}

double remaining(Clock::time_point deadline) {
  if (deadline == Clock::time_point::max()) return kInf;
  return std::max(0.0, std::chrono::duration<double>(deadline - Clock::now()).count());
}

void track_kkt(OaResult* log, const Subproblem& sub) {
  if (log && sub.feasible) log->max_kkt_residual = std::max(log->max_kkt_residual, sub.kkt.worst_relative());
}

double run_kelley(const MiqpInstance& inst, const Decomposition& decomp, const OaConfig& config,
                  MasterProblem& master, Clock::time_point deadline, OaResult* log) {
  const NodeRecord root;
  std::vector<int> warm;
  CutPool pool;
  double bound = master.eta_lb();
  for (int round = 0; round <= config.kelley_rounds; ++round) {
    const LpOutcome lp = solve_lp(master, root, deadline);
    if (lp.status == LpStatus::Infeasible) {
      throw Error(ErrorCode::Infeasible, "continuous relaxation is infeasible");
    }
    if (lp.status != LpStatus::Optimal) break;
    bound = std::max(bound, lp.objective);
    if (round == config.kelley_rounds || Clock::now() >= deadline) break;

    const Vector x = lp.point.x.cwiseMax(0.0).cwiseMin(1.0);
    const Subproblem sub = solve_subproblem(inst, decomp, x, warm);
    track_kkt(log, sub);
    if (!sub.feasible) break;
    warm = sub.active_rows;
    if (sub.value - lp.point.eta < config.kelley_tol * std::max(1.0, std::abs(sub.value))) break;
    Cut cut = cut_persp(inst, decomp, x, sub);
    if (!pool.insert(cut)) break;
    master.add_cut(cut);
    if (log) {
      ++log->root_cuts;
      if (config.record_cuts) log->cut_log.push_back(std::move(cut));
    }
  }
  return bound;
}

// Binary point from the k largest LP values (ties by |y|); without a
// cardinality bound, every x_i >= 0.5.
Vector round_top(const MiqpInstance& inst, const LpPoint& lp) {
  const int n = inst.n;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (lp.x(a) != lp.x(b)) return lp.x(a) > lp.x(b);
    return std::abs(lp.y(a)) > std::abs(lp.y(b));
  });
  Vector xb = Vector::Zero(n);
  const int take = inst.k ? *inst.k : std::max<int>(1, static_cast<int>((lp.x.array() >= 0.5).count()));
  for (int i = 0; i < take; ++i) {
    const int j = order[static_cast<std::size_t>(i)];
    if (i > 0 && lp.x(j) <= 1e-9) break;
    xb(j) = 1.0;
  }
  return xb;
}

}  // namespace

double trivial_bound(const MiqpInstance& inst) {
  // min_y y^T Q y + g^T y = -g^T Q^{-1} g / 4
  const Vector w = spd_solve(inst.Q, inst.g);
  double bound = -0.25 * inst.g.dot(w);
  std::vector<double> neg;
  for (int i = 0; i < inst.n; ++i) {
    if (inst.h(i) < 0.0) neg.push_back(inst.h(i));
  }
  std::sort(neg.begin(), neg.end());
  const std::size_t take = std::min(neg.size(), static_cast<std::size_t>(inst.k.value_or(inst.n)));
  for (std::size_t i = 0; i < take; ++i) bound += neg[i];
  return bound;
}

double qp_relax_bound(const MiqpInstance& inst) {
  const int n = inst.n;
  const int m1 = inst.m1(), m2 = inst.m2();
  const int rows = m1 + m2 + 2 * n + (inst.k ? 1 : 0);
  QpProblem qp;
  qp.H = Matrix::Zero(2 * n, 2 * n);
  qp.H.topLeftCorner(n, n) = inst.Q;
  qp.c.resize(2 * n);
  qp.c << inst.g, inst.h;
  qp.G = Matrix::Zero(rows, 2 * n);
  qp.rhs = Vector::Zero(rows);
  if (m1 > 0) {
    qp.G.block(0, 0, m1, n) = Matrix(inst.A);
    qp.rhs.head(m1) = inst.b;
  }
  if (m2 > 0) {
    qp.G.block(m1, 0, m2, n) = Matrix(inst.C);
    qp.G.block(m1, n, m2, n) = -Matrix(inst.D);
  }
  const int xb = m1 + m2;
  for (int i = 0; i < n; ++i) {
    qp.G(xb + i, n + i) = 1.0;
    qp.rhs(xb + i) = 1.0;
    qp.G(xb + n + i, n + i) = -1.0;
  }
  if (inst.k) {
    qp.G.block(rows - 1, n, 1, n).setOnes();
    qp.rhs(rows - 1) = *inst.k;
  }
  const QpSolution sol = solve_qp(qp);
  if (sol.status == QpStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "continuous relaxation is infeasible");
  }
  if (sol.status != QpStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure, "continuous relaxation reported unbounded");
  }
  return sol.objective;
}

double root_lower_bound(const MiqpInstance& inst, const Decomposition& decomp,
                        const OaConfig& config, MasterProblem* master, OaResult* log) {
  switch (config.root_bound) {
    case RootBound::QpRelax:
      return qp_relax_bound(inst);
    case RootBound::Explicit:
      if (!config.explicit_lb || !std::isfinite(*config.explicit_lb)) {
        throw Error(ErrorCode::InvalidArgument, "explicit root bound requested without a value");
      }
      return *config.explicit_lb;
    case RootBound::KelleyPersp: {
      const double start = config.explicit_lb.value_or(trivial_bound(inst));
      const auto deadline = deadline_after(Clock::now(), config.time_limit);
      if (master) {
        master->raise_eta_lb(start);
        return run_kelley(inst, decomp, config, *master, deadline, log);
      }
      MasterProblem scratch(inst, start);
      return run_kelley(inst, decomp, config, scratch, deadline, log);
    }
  }
  return -kInf;
}

OaResult solve(const MiqpInstance& inst, const Decomposition& decomp, const OaConfig& config) {
  const auto t0 = Clock::now();
  const auto deadline = deadline_after(t0, config.time_limit);
  if (!(config.gap_tol > 0.0) || !(config.time_limit > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gap_tol and time_limit must be positive");
  }
  if (config.cut_source == CutSource::Bc) {
    throw Error(ErrorCode::InvalidArgument, "the OA driver generates persp or persp_ro cuts");
  }
  if (config.cut_source == CutSource::PerspRo && !decomp.rank_one_ready) {
    throw Error(ErrorCode::InvalidArgument, "persp_ro cuts need rank-one factors");
  }
  const Tolerances& tol = tolerances();
  OaResult res;

  // Build the master. For Kelley the fractional cuts either stay in the
  // master or only their bound survives.
  std::optional<MasterProblem> master;
  if (config.root_bound == RootBound::KelleyPersp) {
    OaConfig kc = config;
    kc.time_limit = remaining(deadline);
    const double start = config.explicit_lb.value_or(trivial_bound(inst));
    master.emplace(inst, start);
    try {
      if (config.keep_root_cuts) {
        res.root_bound = root_lower_bound(inst, decomp, kc, &*master, &res);
        res.cuts = master->num_cut_rows();
      } else {
        res.root_bound = root_lower_bound(inst, decomp, kc, nullptr, &res);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      res.status = OaStatus::Infeasible;
      res.wall_time = seconds_since(t0);
      return res;
    }
    master->raise_eta_lb(res.root_bound);
  } else {
    try {
      res.root_bound = root_lower_bound(inst, decomp, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      res.status = OaStatus::Infeasible;
      res.wall_time = seconds_since(t0);
      return res;
    }
    master.emplace(inst, res.root_bound);
  }

  CutPool pool;
  std::vector<int> warm;
  const auto generate = [&](const Vector& xb, const Subproblem& sub) {
    const auto c0 = Clock::now();
    Cut cut = config.cut_source == CutSource::Persp ? cut_persp(inst, decomp, xb, sub)
                                                    : cut_persp_ro(inst, decomp, xb, sub);
    res.cut_seconds.push_back(seconds_since(c0));
    return cut;
  };
  const auto evaluate = [&](const Vector& xb) {
    const auto c0 = Clock::now();
    Subproblem sub = solve_subproblem(inst, decomp, xb, warm);
    const double spent = seconds_since(c0);
    track_kkt(&res, sub);
    if (sub.feasible) warm = sub.active_rows;
    return std::pair{std::move(sub), spent};
  };

  if (config.mode == OaMode::SingleTree) {
    const LazyCallback callback = [&](const Vector& xb, const LpPoint&) {
      LazyReply reply;
      auto [sub, qp_time] = evaluate(xb);
      if (!sub.feasible) return reply;
      reply.value = sub.value;
      reply.y = sub.y;
      if (pool.contains(config.cut_source, xb)) return reply;
      Cut cut = generate(xb, sub);
      res.cut_seconds.back() += qp_time;
      pool.insert(cut);
      if (config.record_cuts) res.cut_log.push_back(cut);
      reply.cut = std::move(cut);
      return reply;
    };
    std::vector<int> frac_warm;
    const SeparationCallback separate = [&](const LpPoint& lp) -> std::optional<Cut> {
      const Vector x = lp.x.cwiseMax(0.0).cwiseMin(1.0);
      const Subproblem sub = solve_subproblem(inst, decomp, x, frac_warm);
      track_kkt(&res, sub);
      if (!sub.feasible) return std::nullopt;
      frac_warm = sub.active_rows;
      Cut cut = cut_persp(inst, decomp, x, sub);
      if (config.record_cuts) res.cut_log.push_back(cut);
      return cut;
    };
    const HeuristicCallback heuristic = [&](MasterProblem& m, const LpPoint& lp) -> std::optional<Cut> {
      const Vector xb = round_top(inst, lp);
      auto [sub, qp_time] = evaluate(xb);
      if (!sub.feasible) return std::nullopt;
      inject_incumbent(m, xb, sub.value, sub.y);
      if (pool.contains(config.cut_source, xb)) return std::nullopt;
      Cut cut = generate(xb, sub);
      res.cut_seconds.back() += qp_time;
      pool.insert(cut);
      if (config.record_cuts) res.cut_log.push_back(cut);
      return cut;
    };
    BnbOptions opts;
    opts.gap_tol = config.gap_tol;
    opts.time_limit = remaining(deadline);
    opts.node_log = config.node_log;
    opts.plunge = config.plunge;
    if (config.node_cut_rounds > 0) {
      opts.separate = separate;
      opts.node_cut_rounds = config.node_cut_rounds;
      opts.node_cut_violation = config.node_cut_violation;
    }
    if (config.heuristic_every >= 0) {
      opts.heuristic = heuristic;
      opts.heuristic_every = config.heuristic_every;
    }
    const BnbResult bnb = branch_and_bound(*master, callback, opts);
    res.node_cuts = bnb.user_cuts;
    res.nodes = bnb.nodes;
    res.cuts += bnb.cuts_added;
    res.lp_iterations = bnb.lp_iterations;
    res.min_bound_step = bnb.min_bound_step;
    res.lower_bound = std::max(bnb.lower_bound, res.root_bound);
    res.status = bnb.status == BnbStatus::TimeLimit ? OaStatus::TimeLimit
                 : bnb.status == BnbStatus::Infeasible ? OaStatus::Infeasible
                                                        : OaStatus::Optimal;
  } else {
    double upper = kInf;
    double lower = res.root_bound;
    res.status = OaStatus::Optimal;
    for (;;) {
      if (Clock::now() >= deadline) {
        res.status = OaStatus::TimeLimit;
        break;
      }
      master->incumbent = Incumbent{};
      const LazyCallback callback = [](const Vector&, const LpPoint& lp) {
        LazyReply reply;
        reply.value = lp.eta;
        return reply;
      };
      BnbOptions opts;
      opts.gap_tol = config.gap_tol;
      opts.time_limit = remaining(deadline);
      opts.cutoff = upper;
      const BnbResult bnb = branch_and_bound(*master, callback, opts);
      res.nodes += bnb.nodes;
      res.lp_iterations += bnb.lp_iterations;
      res.min_bound_step = std::min(res.min_bound_step, bnb.min_bound_step);
      if (bnb.status == BnbStatus::TimeLimit) {
        lower = std::max(lower, std::min(bnb.lower_bound, upper));
        res.status = OaStatus::TimeLimit;
        break;
      }
      if (bnb.status == BnbStatus::Infeasible) {
        // Nothing left below the cutoff: the best visited point is optimal.
        if (!std::isfinite(upper)) res.status = OaStatus::Infeasible;
        lower = std::max(lower, std::min(bnb.lower_bound, upper));
        break;
      }
      lower = std::max(lower, bnb.lower_bound);
      const Vector xt = *master->incumbent.x;
      const double eta_t = master->incumbent.value;
      ++res.iterations;
      auto [sub, qp_time] = evaluate(xt);
      if (!sub.feasible) {
        master->add_no_good(xt);
        ++res.cuts;
        continue;
      }
      if (sub.value < upper) {
        upper = sub.value;
        res.x_opt = xt;
        res.y_opt = sub.y;
        res.objective = sub.value;
      }
      if (eta_t >= sub.value - tol.cut_violation * std::max(1.0, std::abs(sub.value))) break;
      if (relative_gap(upper, lower) <= config.gap_tol) break;
      Cut cut = generate(xt, sub);
      res.cut_seconds.back() += qp_time;
      pool.insert(cut);
      res.multi_tree_points.push_back(xt);
      if (config.record_cuts) res.cut_log.push_back(cut);
      master->add_cut(cut);
      ++res.cuts;
    }
    master->incumbent = Incumbent{};
    if (std::isfinite(upper)) inject_incumbent(*master, res.x_opt, upper, res.y_opt);
    res.lower_bound = std::min(lower, upper);
  }

  if (master->incumbent.x) {
    res.x_opt = *master->incumbent.x;
    res.y_opt = master->incumbent.y;
    res.objective = master->incumbent.value;
  }
  if (res.status == OaStatus::Optimal && !master->incumbent.x) res.status = OaStatus::Infeasible;
  res.lower_bound = std::min(res.lower_bound, res.objective);
  res.gap = relative_gap(res.objective, res.lower_bound);
  res.wall_time = seconds_since(t0);
  return res;
}

}  // namespace miqp
