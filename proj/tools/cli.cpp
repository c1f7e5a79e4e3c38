#include "cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "miqp/error.hpp"

namespace miqp::tools {

namespace {

using nlohmann::json;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream f(path, mode);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  return f;
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

}  // namespace

int exit_code(OaStatus status) {
  switch (status) {
    case OaStatus::Optimal: return kExitOk;
    case OaStatus::TimeLimit: return kExitTimeLimit;
    case OaStatus::Infeasible: return kExitInfeasible;
  }
  return kExitError;
}

int cmd_generate(const GenerateOptions& opts, std::ostream& out) {
  const MiqpInstance inst = generate_portfolio({opts.n, opts.k, opts.seed});
  if (opts.out.empty()) {
    out << format_instance(inst);
  } else {
    write_instance(inst, opts.out);
    out << "wrote " << inst.name << " to " << opts.out << '\n';
  }
  return kExitOk;
}

std::string solve_record(const MiqpInstance& inst, const SolveOptions& opts, const OaResult& res) {
  json j;
  j["instance"] = inst.name;
  j["n"] = inst.n;
  j["k"] = inst.k ? json(*inst.k) : json(nullptr);
  j["method"] = method_name(opts.solver.method);
  j["mode"] = mode_name(opts.solver.mode);
  j["decomposition"] = to_string(opts.solver.decomposition);
  j["status"] = status_name(res.status);
  j["objective"] = res.objective;
  j["lower_bound"] = res.lower_bound;
  j["gap"] = res.gap;
  j["root_bound"] = res.root_bound;
  j["nodes"] = res.nodes;
  j["cuts"] = res.cuts;
  j["root_cuts"] = res.root_cuts;
  j["node_cuts"] = res.node_cuts;
  j["iterations"] = res.iterations;
  j["time"] = res.wall_time;
  j["x"] = to_json(res.x_opt);
  j["y"] = to_json(res.y_opt);
  return j.dump();
}

std::string cut_record(const Cut& cut) {
  json j;
  j["source"] = to_string(cut.source);
  j["point"] = to_json(cut.point);
  j["t"] = to_json(cut.t);
  j["offset"] = cut.offset;
  j["marginal_value"] = cut.marginal_value;
  return j.dump();
}

std::string check_record(const CheckResult& c) {
  json j;
  j["criterion"] = c.criterion;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["worst"] = c.worst;
  j["limit"] = c.limit;
  j["direction"] = c.at_least ? "min" : "max";
  j["detail"] = c.detail;
  j["seconds"] = c.seconds;
  return j.dump();
}

int cmd_solve(const SolveOptions& opts, std::ostream& out) {
  const MiqpInstance inst = read_instance(opts.path);
  validate(inst);
  const OaResult res = run_solver(inst, opts.solver, true);
  const std::string record = solve_record(inst, opts, res);
  if (!opts.out.empty()) open_out(opts.out, std::ios::app) << record << '\n';
  if (!opts.cut_log.empty()) {
    std::ofstream log = open_out(opts.cut_log, std::ios::trunc);
    for (const Cut& cut : res.cut_log) log << cut_record(cut) << '\n';
  }
  if (opts.json) {
    out << record << '\n';
    return exit_code(res.status);
  }
  const bool has_incumbent = res.x_opt.size() > 0;
  char gap[40];
  std::snprintf(gap, sizeof gap, "%.4f%%", 100.0 * res.gap);
  char time[40];
  std::snprintf(time, sizeof time, "%.3f s", res.wall_time);
  out << "instance    " << inst.name << '\n'
      << "method      " << method_name(opts.solver.method) << " (" << mode_name(opts.solver.mode)
      << " tree, " << to_string(opts.solver.decomposition) << ")\n"
      << "status      " << status_name(res.status) << '\n'
      << "objective   " << (has_incumbent ? num(res.objective) : "none") << '\n'
      << "bound       " << num(res.lower_bound) << '\n'
      << "gap         " << (has_incumbent ? gap : "inf") << '\n'
      << "nodes       " << res.nodes << '\n'
      << "cuts        " << res.cuts << '\n'
      << "time        " << time << '\n';
  return exit_code(res.status);
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  if (!opts.out.empty()) file = open_out(opts.out, std::ios::trunc);
  std::ostream& csv = opts.out.empty() ? out : file;
  csv << kBenchHeader << '\n' << std::flush;

  g_interrupted.store(false);
  const auto previous = std::signal(SIGINT, on_interrupt);
  bool complete = false;
  try {
    complete = run_bench(
        opts.spec, [&](const BenchRow& row) { csv << format_bench_row(row) << '\n' << std::flush; },
        &g_interrupted);
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);
  if (!complete) {
    err << "interrupted: partial results written\n";
    return kExitInterrupted;
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out) {
  const std::vector<CheckResult> checks = run_verification(opts.level, &out, opts.threads);
  int failed = 0;
  for (const CheckResult& c : checks) failed += c.passed ? 0 : 1;
  if (!opts.out.empty()) {
    std::ofstream f = open_out(opts.out, std::ios::trunc);
    for (const CheckResult& c : checks) f << check_record(c) << '\n';
  }
  out << (failed == 0 ? "verify: all " + std::to_string(checks.size()) + " checks passed"
                      : "verify: " + std::to_string(failed) + " of " +
                            std::to_string(checks.size()) + " checks failed")
      << '\n';
  return failed == 0 ? kExitOk : kExitVerifyFailed;
}

namespace {

void add_solver_flags(CLI::App* cmd, SolverSettings& s, std::string& mode,
                      std::string& decomposition) {
  cmd->add_option("--mode", mode, "single or multi (tree)")->capture_default_str();
  cmd->add_option("--gap", s.gap, "relative optimality gap")->capture_default_str();
  cmd->add_option("--time-limit", s.time_limit, "seconds per solve")->capture_default_str();
  cmd->add_option("--decomposition", decomposition,
                  "dominance-shift, diag-dominance, uniform-min-eig or auto")
      ->capture_default_str();
  cmd->add_option("--node-cuts", s.node_cuts, "cut rounds at fractional nodes")
      ->capture_default_str();
  cmd->add_option("--heuristic-every", s.heuristic_every,
                  "run top-k rounding every N nodes (negative disables)")
      ->capture_default_str();
  cmd->add_flag("--plunge", s.plunge, "depth-first dives after branching");
}

std::optional<int> parse_k(const std::string& text) {
  if (text == "none") return std::nullopt;
  std::size_t pos = 0;
  int k = 0;
  try {
    k = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size()) throw Error(ErrorCode::BadSpec, "bad k value '" + text + "'");
  return k;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outer approximation with perspective cuts for MIQPs with indicator variables",
               "miqp-oa"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "write a random portfolio instance");
  generate->add_option("--n", gen.n, "number of assets")->required();
  generate->add_option("--k", gen.k, "cardinality bound (omit for none)");
  generate->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "output .miqp file (default stdout)");

  SolveOptions sol;
  std::string method = "oa-persp", mode = "single", decomposition = "dominance-shift";
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance file");
  solve_cmd->add_option("file", sol.path, ".miqp instance")->required();
  solve_cmd->add_option("--method", method, "oa-persp or oa-persp-ro")->capture_default_str();
  add_solver_flags(solve_cmd, sol.solver, mode, decomposition);
  solve_cmd->add_option("--out", sol.out, "append a JSON-lines record to this file");
  solve_cmd->add_option("--cut-log", sol.cut_log, "write every emitted cut as JSON lines");
  solve_cmd->add_flag("--json", sol.json, "print the JSON record instead of the table");

  BenchOptions bench;
  std::string sizes = "12", ks = "4,6", methods = "oa-persp,oa-persp-ro";
  std::uint64_t first_seed = 1;
  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark sweep over generated instances");
  bench_cmd->add_option("--sizes", sizes, "comma-separated n values")->capture_default_str();
  bench_cmd->add_option("--k", ks, "comma-separated k values ('none' for no bound)")
      ->capture_default_str();
  bench_cmd->add_option("--seeds", bench.spec.seeds, "instances per cell")->capture_default_str();
  bench_cmd->add_option("--seed", first_seed, "first seed")->capture_default_str();
  bench_cmd->add_option("--method,--methods", methods, "comma-separated methods")
      ->capture_default_str();
  add_solver_flags(bench_cmd, bench.spec.solver, mode, decomposition);
  bench_cmd->add_option("--threads", bench.spec.threads, "parallel solves")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV file (default stdout)");

  VerifyOptions ver;
  std::string level = "quick";
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}))
      ->capture_default_str();
  verify_cmd->add_option("--threads", ver.threads, "parallel benchmark solves")
      ->capture_default_str();
  verify_cmd->add_option("--out", ver.out, "write the report as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*solve_cmd) {
      sol.solver.method = parse_method(method);
      sol.solver.mode = parse_mode(mode);
      sol.solver.decomposition = parse_decomposition(decomposition);
      return cmd_solve(sol, out);
    }
    if (*bench_cmd) {
      BenchSpec& spec = bench.spec;
      for (const std::string& s : split_list(sizes)) {
        const std::optional<int> n = parse_k(s);
        if (!n) throw Error(ErrorCode::BadSpec, "sizes must be integers");
        spec.sizes.push_back(*n);
      }
      for (const std::string& s : split_list(ks)) spec.ks.push_back(parse_k(s));
      spec.methods.clear();
      for (const std::string& s : split_list(methods)) spec.methods.push_back(parse_method(s));
      if (spec.sizes.empty() || spec.ks.empty() || spec.methods.empty()) {
        throw Error(ErrorCode::BadSpec, "sizes, k and methods must be nonempty");
      }
      spec.first_seed = first_seed;
      spec.solver.mode = parse_mode(mode);
      spec.solver.decomposition = parse_decomposition(decomposition);
      return cmd_bench(bench, out, err);
    }
    if (*verify_cmd) {
      ver.level = level == "full" ? VerifyLevel::Full : VerifyLevel::Quick;
      return cmd_verify(ver, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("miqp-oa");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace miqp::tools
