#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "miqp/oa.hpp"
#include "runner.hpp"
#include "verify.hpp"

namespace miqp::tools {

/// Process exit codes. Stable: scripts and the golden tests depend on them.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitTimeLimit = 2,
  kExitInfeasible = 3,
  kExitVerifyFailed = 4,
  kExitInterrupted = 130,
};

struct GenerateOptions {
  int n = 0;
  std::optional<int> k;
  std::uint64_t seed = 1;
  std::string out;  ///< empty: stdout
};

struct SolveOptions {
  std::string path;
  SolverSettings solver;
  std::string out;      ///< JSON-lines file, appended
  std::string cut_log;  ///< JSON-lines file with every emitted cut
  bool json = false;    ///< print the JSON record instead of the table
};

struct BenchOptions {
  BenchSpec spec;
  std::string out;  ///< empty: stdout
};

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::Quick;
  int threads = 1;
  std::string out;  ///< JSON-lines report
};

int cmd_generate(const GenerateOptions& opts, std::ostream& out);
int cmd_solve(const SolveOptions& opts, std::ostream& out);
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opts, std::ostream& out);

/// One JSON object (no trailing newline) describing a solve.
std::string solve_record(const MiqpInstance& inst, const SolveOptions& opts, const OaResult& res);
std::string cut_record(const Cut& cut);
std::string check_record(const CheckResult& check);

int exit_code(OaStatus status);

/// Parses the command line and dispatches. Errors become a one-line
/// diagnostic on `err` and exit code 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace miqp::tools
