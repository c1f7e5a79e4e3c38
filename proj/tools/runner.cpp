#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "miqp/error.hpp"

namespace miqp::tools {

std::string_view method_name(CutSource method) {
  switch (method) {
    case CutSource::Persp: return "oa-persp";
    case CutSource::PerspRo: return "oa-persp-ro";
    case CutSource::Bc: break;
  }
  throw Error(ErrorCode::InvalidArgument, "no OA method uses bc cuts");
}

CutSource parse_method(std::string_view text) {
  if (text == "oa-persp") return CutSource::Persp;
  if (text == "oa-persp-ro") return CutSource::PerspRo;
  throw Error(ErrorCode::InvalidArgument,
              "unknown method '" + std::string(text) + "' (oa-persp, oa-persp-ro)");
}

std::string_view mode_name(OaMode mode) {
  return mode == OaMode::SingleTree ? "single" : "multi";
}

OaMode parse_mode(std::string_view text) {
  if (text == "single") return OaMode::SingleTree;
  if (text == "multi") return OaMode::MultiTree;
  throw Error(ErrorCode::InvalidArgument,
              "unknown mode '" + std::string(text) + "' (single, multi)");
}

DiagonalStrategy parse_decomposition(std::string_view text) {
  for (DiagonalStrategy s : {DiagonalStrategy::DominanceShift, DiagonalStrategy::DiagDominance,
                             DiagonalStrategy::UniformMinEig, DiagonalStrategy::Auto}) {
    if (text == to_string(s)) return s;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown decomposition '" + std::string(text) +
                  "' (dominance-shift, diag-dominance, uniform-min-eig, auto)");
}

std::string_view status_name(OaStatus status) {
  switch (status) {
    case OaStatus::Optimal: return "optimal";
    case OaStatus::TimeLimit: return "time-limit";
    case OaStatus::Infeasible: return "infeasible";
  }
  return "?";
}

OaConfig make_config(const SolverSettings& settings, bool record_cuts) {
  OaConfig config;
  config.cut_source = settings.method;
  config.mode = settings.mode;
  config.gap_tol = settings.gap;
  config.time_limit = settings.time_limit;
  config.node_cut_rounds = settings.node_cuts;
  config.heuristic_every = settings.heuristic_every;
  config.plunge = settings.plunge;
  config.record_cuts = record_cuts;
  return config;
}

OaResult run_solver(const MiqpInstance& inst, const SolverSettings& settings, bool record_cuts) {
  const Decomposition decomp = decompose(inst.Q, inst.g, settings.decomposition);
  return solve(inst, decomp, make_config(settings, record_cuts));
}

namespace {

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string k_label(const std::optional<int>& k) { return k ? std::to_string(*k) : "none"; }

struct Task {
  int size;
  std::optional<int> k;
  CutSource method;
  std::uint64_t seed;
  bool closes_cell;
};

BenchRow run_task(const Task& task, const SolverSettings& base) {
  BenchRow row;
  row.size = task.size;
  row.k = task.k;
  row.method = task.method;
  try {
    const MiqpInstance inst = generate_portfolio({task.size, task.k, task.seed});
    row.instance = inst.name;
    SolverSettings settings = base;
    settings.method = task.method;
    const OaResult res = run_solver(inst, settings);
    row.gap_percent = 100.0 * res.gap;
    row.time = res.wall_time;
    row.nodes = static_cast<double>(res.nodes);
    row.cuts = static_cast<double>(res.cuts);
    row.status = std::string(status_name(res.status));
  } catch (const std::exception& e) {
    if (row.instance.empty()) {
      row.instance = "portfolio_n" + std::to_string(task.size) + "_k" + k_label(task.k) + "_s" +
                     std::to_string(task.seed);
    }
    row.gap_percent = std::numeric_limits<double>::infinity();
    row.status = "error";
  }
  return row;
}

}  // namespace

std::string format_bench_row(const BenchRow& row) {
  const int count_digits = row.aggregate ? 1 : 0;
  std::string out = row.instance;
  out += ',' + std::to_string(row.size);
  out += ',' + k_label(row.k);
  out += ',' + std::string(method_name(row.method));
  out += ',' + fixed(row.gap_percent, 4);
  out += ',' + fixed(row.time, 2);
  out += ',' + fixed(row.nodes, count_digits);
  out += ',' + fixed(row.cuts, count_digits);
  out += ',' + row.status;
  out += row.aggregate ? ",aggregate" : ",instance";
  return out;
}

BenchRow aggregate_rows(const std::vector<BenchRow>& cell) {
  BenchRow agg;
  agg.aggregate = true;
  agg.instance = "mean";
  if (cell.empty()) return agg;
  agg.size = cell.front().size;
  agg.k = cell.front().k;
  agg.method = cell.front().method;
  for (const BenchRow& r : cell) {
    agg.gap_percent += r.gap_percent;
    agg.time += r.time;
    agg.nodes += r.nodes;
    agg.cuts += r.cuts;
    if (r.status == "optimal") ++agg.solved;
  }
  agg.count = static_cast<int>(cell.size());
  const double n = agg.count;
  agg.gap_percent /= n;
  agg.time /= n;
  agg.nodes /= n;
  agg.cuts /= n;
  agg.status = std::to_string(agg.solved) + "/" + std::to_string(agg.count);
  return agg;
}

bool run_bench(const BenchSpec& spec, const std::function<void(const BenchRow&)>& emit,
               const std::atomic<bool>* stop) {
  if (spec.seeds < 1) throw Error(ErrorCode::BadSpec, "need at least one seed");
  std::vector<Task> tasks;
  for (int size : spec.sizes) {
    for (const auto& k : spec.ks) {
      for (CutSource method : spec.methods) {
        for (int s = 0; s < spec.seeds; ++s) {
          tasks.push_back({size, k, method, spec.first_seed + static_cast<std::uint64_t>(s),
                           s + 1 == spec.seeds});
        }
      }
    }
  }

  std::vector<std::optional<BenchRow>> done(tasks.size());
  std::vector<BenchRow> cell;
  std::size_t next_task = 0;
  std::size_t next_emit = 0;
  std::mutex mu;

  // Emits the completed prefix; caller holds the lock.
  const auto flush = [&] {
    while (next_emit < tasks.size() && done[next_emit]) {
      emit(*done[next_emit]);
      cell.push_back(*done[next_emit]);
      if (tasks[next_emit].closes_cell) {
        emit(aggregate_rows(cell));
        cell.clear();
      }
      ++next_emit;
    }
  };
  const auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next_task >= tasks.size() || (stop && stop->load())) return;
        i = next_task++;
      }
      BenchRow row = run_task(tasks[i], spec.solver);
      std::lock_guard lock(mu);
      done[i] = std::move(row);
      flush();
    }
  };

  const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (next_emit == tasks.size()) return true;
  // Stopped early: whatever finished after the first gap, without aggregates.
  for (std::size_t i = next_emit; i < tasks.size(); ++i) {
    if (done[i]) emit(*done[i]);
  }
  return false;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    if (end > start) out.emplace_back(text.substr(start, end - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace miqp::tools
