#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "miqp/cuts.hpp"
#include "miqp/instance.hpp"
#include "miqp/lp.hpp"

namespace miqp {

struct Incumbent {
  std::optional<Vector> x;
  Vector y;
  double value = std::numeric_limits<double>::infinity();
};

/// Polyhedral relaxation over (x, y, eta): copy rows A y <= b and
/// C y - D x <= 0, optional cardinality row, eta >= eta_lb as a bound, and
/// cut rows appended over time. Variable layout: x = [0, n), y = [n, 2n),
/// eta = 2n.
class MasterProblem {
 public:
  MasterProblem(const MiqpInstance& inst, double eta_lb);

  int n() const { return n_; }
  int eta_index() const { return 2 * n_; }
  double eta_lb() const { return eta_lb_; }
  /// Raises the eta bound (never lowers it).
  void raise_eta_lb(double value);

  /// eta >= t^T x + offset.
  void add_cut(const Cut& cut);
  /// Excludes one binary point: sum_{x_i = 1} (1 - x_i) + sum_{x_i = 0} x_i >= 1.
  void add_no_good(const Vector& x_binary);

  int num_rows() const { return lp_.num_rows(); }
  int num_cut_rows() const { return cut_rows_; }

  DualSimplex& lp() { return lp_; }
  const DualSimplex& lp() const { return lp_; }

  Incumbent incumbent;

 private:
  int n_;
  double eta_lb_;
  int cut_rows_ = 0;
  DualSimplex lp_;
};

/// Improves the incumbent iff value is lower. Returns whether it changed.
bool inject_incumbent(MasterProblem& master, const Vector& x, double value,
                      const Vector& y = Vector());

enum class NodeStatus { Open, Infeasible, PrunedByBound, Integral, Branched };

struct NodeRecord {
  int id = 0;
  int parent = -1;
  int depth = 0;
  std::vector<int> fixed0;
  std::vector<int> fixed1;
  double bound = -std::numeric_limits<double>::infinity();
  NodeStatus status = NodeStatus::Open;
};

struct LpPoint {
  Vector x, y;
  double eta = 0.0;
};

struct LpOutcome {
  LpStatus status = LpStatus::Optimal;
  LpPoint point;
  double objective = 0.0;
  double dual_infeasibility = 0.0;
};

/// Applies the node's fixings as bounds and re-optimises warm.
LpOutcome solve_lp(MasterProblem& master, const NodeRecord& node,
                   DualSimplex::Clock::time_point deadline = DualSimplex::Clock::time_point::max());

/// Reply of the lazy callback at an integral LP point.
struct LazyReply {
  double value = std::numeric_limits<double>::infinity();  ///< upper bound at x; +inf if infeasible
  Vector y;
  std::optional<Cut> cut;
};

using LazyCallback = std::function<LazyReply(const Vector& x, const LpPoint& lp)>;

/// Optional cut at a fractional LP point (user cuts).
using SeparationCallback = std::function<std::optional<Cut>(const LpPoint& lp)>;

/// Optional primal heuristic at a fractional LP point; reports through
/// inject_incumbent and may return a cut, which is always added.
using HeuristicCallback = std::function<std::optional<Cut>(MasterProblem& master, const LpPoint& lp)>;

struct BnbOptions {
  double gap_tol = 1e-4;
  double time_limit = std::numeric_limits<double>::infinity();
  /// Nodes whose bound reaches this value are pruned even without an incumbent.
  double cutoff = std::numeric_limits<double>::infinity();
  std::ostream* node_log = nullptr;
  /// Process a child of the node just branched before returning to
  /// best-bound order (depth-first plunging).
  bool plunge = false;
  SeparationCallback separate;
  /// Separation rounds per node; a cut is kept if it is violated by more
  /// than node_cut_violation * max(1, |eta|).
  int node_cut_rounds = 0;
  double node_cut_violation = 1e-4;
  HeuristicCallback heuristic;
  int heuristic_every = 0;  ///< run at the root and every this many nodes (0: root only)
};

enum class BnbStatus { Optimal, Infeasible, TimeLimit };

struct BnbResult {
  BnbStatus status = BnbStatus::Optimal;
  double lower_bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
  long cuts_added = 0;
  long user_cuts = 0;  ///< cuts from the separation callback and heuristic (also in cuts_added)
  long lp_iterations = 0;
  double max_dual_infeasibility = 0.0;
  /// Smallest child-minus-parent bound difference seen (monotonicity check).
  double min_bound_step = std::numeric_limits<double>::infinity();
};

/// Best-bound branch and bound with lazy cuts. Integral LP points go to the
/// callback; its value is offered to the incumbent, and a returned cut that
/// is violated by more than cut_violation * max(1, |value|) is appended and
/// the node re-solved. The incumbent lives in master.incumbent.
BnbResult branch_and_bound(MasterProblem& master, const LazyCallback& callback,
                           const BnbOptions& options);

/// Gap measure shared by the solver and its reports.
double relative_gap(double upper, double lower);

}  // namespace miqp
