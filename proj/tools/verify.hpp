#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "miqp/instance.hpp"
#include "miqp/qp.hpp"

namespace miqp::tools {

/// One measured property. `worst` is compared against `limit` in the
/// direction given by `at_least`.
struct CheckResult {
  int criterion = 0;  ///< acceptance criterion number, 0 for extra checks
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double limit = 0.0;
  bool at_least = false;
  std::string detail;
  double seconds = 0.0;
};

std::string format_check(const CheckResult& check);

enum class VerifyLevel { Quick, Full };

/// Random instance with a dense PD Q, random g and h, two knapsack-like rows
/// and bound rows |y_i| <= u_i x_i. y = 0 is always feasible, so every binary
/// x has a finite value.
MiqpInstance random_indicator_instance(int n, std::uint64_t seed);

/// Random strictly convex QP with m variables and p rows, feasible by construction.
QpProblem random_qp(int m, int p, std::uint64_t seed);

struct QpOracleResult {
  bool feasible = false;
  Vector y;
  double objective = 0.0;
};

/// Enumerates every linearly independent working set and keeps the KKT point
/// with the lowest objective.
QpOracleResult enumerate_active_sets(const QpProblem& prob);

struct ExactnessSuite {
  int instances = 50;
  std::uint64_t first_seed = 1;
  int n_min = 8, n_max = 15;
  int k_min = 3, k_max = 6;
  double time_budget = 300.0;
};

/// Brute force against single-tree persp, single-tree persp-ro and multi-tree
/// persp on each instance. Returns the exactness, cut-audit and finite
/// convergence checks.
std::vector<CheckResult> check_exactness(const ExactnessSuite& suite, std::ostream* progress);

CheckResult check_bc_equivalence(int instances, int points, std::uint64_t seed);
CheckResult check_dominance(int points, std::uint64_t seed);
CheckResult check_subgradients(int points, std::uint64_t seed);
CheckResult check_qp_solver(int problems, std::uint64_t seed);
CheckResult check_decompositions(int instances);
/// The delta^2/4 coefficient must be caught by the auditor and delta/4 must not.
CheckResult check_mutation();

struct BenchmarkSuite {
  int n = 60;
  std::vector<int> ks{6, 8, 10};
  int seeds = 5;
  double time_limit = 120.0;
  double gap = 1e-4;
  int threads = 1;
};

CheckResult check_benchmark(const BenchmarkSuite& suite, std::ostream* progress);

/// Median time of one subproblem solve plus cut at random admissible binaries
/// with |S| = k, as the ratio large/small.
CheckResult check_cut_scaling(int n_small, int n_large, int k, int samples, double max_ratio);

std::vector<CheckResult> run_verification(VerifyLevel level, std::ostream* progress,
                                          int threads = 1);

}  // namespace miqp::tools
