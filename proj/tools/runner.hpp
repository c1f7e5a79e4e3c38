#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "miqp/oa.hpp"

namespace miqp::tools {

/// Solver knobs exposed on the command line.
struct SolverSettings {
  CutSource method = CutSource::Persp;
  OaMode mode = OaMode::SingleTree;
  double gap = 1e-4;
  double time_limit = 600.0;
  DiagonalStrategy decomposition = DiagonalStrategy::DominanceShift;
  int node_cuts = 3;
  int heuristic_every = -1;
  bool plunge = false;
};

/// "oa-persp" / "oa-persp-ro".
std::string_view method_name(CutSource method);
CutSource parse_method(std::string_view text);
/// "single" / "multi".
std::string_view mode_name(OaMode mode);
OaMode parse_mode(std::string_view text);
DiagonalStrategy parse_decomposition(std::string_view text);
/// "optimal" / "time-limit" / "infeasible".
std::string_view status_name(OaStatus status);

OaConfig make_config(const SolverSettings& settings, bool record_cuts);
OaResult run_solver(const MiqpInstance& inst, const SolverSettings& settings,
                    bool record_cuts = false);

inline constexpr std::string_view kBenchHeader =
    "Instance,Size,k,Method,Gap(%),Time(s),Node,Cut,Status,Row";

struct BenchSpec {
  std::vector<int> sizes;
  std::vector<std::optional<int>> ks;  ///< nullopt: no cardinality row
  int seeds = 10;
  std::uint64_t first_seed = 1;
  std::vector<CutSource> methods{CutSource::Persp, CutSource::PerspRo};
  SolverSettings solver;  ///< method field is overridden per cell
  int threads = 1;
};

struct BenchRow {
  std::string instance;
  int size = 0;
  std::optional<int> k;
  CutSource method = CutSource::Persp;
  double gap_percent = 0.0;
  double time = 0.0;
  double nodes = 0.0;
  double cuts = 0.0;
  std::string status;
  bool aggregate = false;
  int solved = 0;  ///< aggregates: instances that reached optimality
  int count = 0;   ///< aggregates: instances in the cell
};

std::string format_bench_row(const BenchRow& row);
/// Means over the instance rows of one cell; status is "solved/count".
BenchRow aggregate_rows(const std::vector<BenchRow>& cell);

/// Runs every (size, k, method, seed) combination. Rows reach `emit` in
/// canonical order (size, k, method, seed) with an aggregate row closing each
/// (size, k, method) cell, regardless of how many workers run. Setting `stop`
/// keeps pending instances from starting; completed rows are still emitted.
/// Returns false when stopped early.
bool run_bench(const BenchSpec& spec, const std::function<void(const BenchRow&)>& emit,
               const std::atomic<bool>* stop = nullptr);

std::vector<std::string> split_list(std::string_view text);

}  // namespace miqp::tools
