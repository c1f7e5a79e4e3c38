#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "miqp/cuts.hpp"
#include "miqp/decompose.hpp"
#include "miqp/instance.hpp"
#include "miqp/master.hpp"

namespace miqp {

enum class OaMode { SingleTree, MultiTree };
enum class RootBound { QpRelax, KelleyPersp, Explicit };
enum class OaStatus { Optimal, TimeLimit, Infeasible };

std::string_view to_string(OaMode m);
std::string_view to_string(RootBound r);
std::string_view to_string(OaStatus s);

struct OaConfig {
  CutSource cut_source = CutSource::Persp;  ///< Persp or PerspRo
  OaMode mode = OaMode::SingleTree;
  double gap_tol = 1e-4;
  double time_limit = std::numeric_limits<double>::infinity();
  RootBound root_bound = RootBound::KelleyPersp;
  std::optional<double> explicit_lb;  ///< required for RootBound::Explicit
  int kelley_rounds = 200;
  double kelley_tol = 1e-6;
  /// Keep the fractional-point cuts from the Kelley loop in the master
  /// (otherwise only the resulting bound on eta is kept).
  bool keep_root_cuts = true;
  /// Single tree only: perspective cuts at fractional node points, and a
  /// top-k rounding heuristic at the root and every heuristic_every nodes.
  int node_cut_rounds = 3;
  double node_cut_violation = 1e-4;
  int heuristic_every = -1;  ///< negative disables the heuristic
  bool plunge = false;
  bool record_cuts = false;  ///< fill OaResult::cut_log
  std::ostream* node_log = nullptr;
};

struct OaResult {
  OaStatus status = OaStatus::Optimal;
  Vector x_opt;
  Vector y_opt;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double root_bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
  long cuts = 0;        ///< cut rows added to the master, root cuts included
  long root_cuts = 0;
  long node_cuts = 0;   ///< fractional-point and heuristic cuts added inside the tree
  long iterations = 0;  ///< multi-tree master solves
  double wall_time = 0.0;
  long lp_iterations = 0;
  double min_bound_step = std::numeric_limits<double>::infinity();
  double max_kkt_residual = 0.0;  ///< worst relative KKT residual over subproblems
  std::vector<Cut> cut_log;            ///< every emitted cut (record_cuts)
  std::vector<double> cut_seconds;     ///< generation time of each binary-point cut
  std::vector<Vector> multi_tree_points;  ///< points that produced a multi-tree cut
};

/// Continuous relaxation over (y, x) with x in [0,1]^n and sum x <= k.
/// Throws Infeasible when it has no solution.
double qp_relax_bound(const MiqpInstance& inst);

/// Finite bound from the unconstrained minimum of y^T Q y + g^T y plus the
/// smallest h^T x over the cardinality box.
double trivial_bound(const MiqpInstance& inst);

/// Root bound per config. For KelleyPersp the loop runs on `master` when
/// given (cuts stay in it), otherwise on a scratch master.
double root_lower_bound(const MiqpInstance& inst, const Decomposition& decomp,
                        const OaConfig& config, MasterProblem* master = nullptr,
                        OaResult* log = nullptr);

OaResult solve(const MiqpInstance& inst, const Decomposition& decomp, const OaConfig& config);

}  // namespace miqp
