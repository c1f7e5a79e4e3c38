#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "miqp/cuts.hpp"
#include "miqp/decompose.hpp"
#include "miqp/error.hpp"
#include "miqp/linalg.hpp"
#include "miqp/oracle.hpp"
#include "miqp/tolerances.hpp"
#include "runner.hpp"

namespace miqp::tools {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CheckResult make_check(int criterion, std::string name, double limit, bool at_least = false) {
  CheckResult r;
  r.criterion = criterion;
  r.name = std::move(name);
  r.passed = true;
  r.limit = limit;
  r.at_least = at_least;
  return r;
}

CheckResult finish(CheckResult r, Clock::time_point t0) {
  r.seconds = since(t0);
  r.passed = r.passed && (r.at_least ? r.worst >= r.limit : r.worst <= r.limit);
  return r;
}

SparseMatrix to_sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

Vector random_binary(int n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = coin(rng) ? 1.0 : 0.0;
  return x;
}

Vector random_subset(int n, int size, std::mt19937_64& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Vector x = Vector::Zero(n);
  for (int i = 0; i < size; ++i) x(idx[static_cast<std::size_t>(i)]) = 1.0;
  return x;
}

PortfolioSpec exactness_spec(const ExactnessSuite& s, std::uint64_t seed) {
  const int n_range = s.n_max - s.n_min + 1;
  const int k_range = s.k_max - s.k_min + 1;
  const auto i = static_cast<int>(seed - 1);
  PortfolioSpec spec;
  spec.n = s.n_min + i % n_range;
  spec.k = std::min(spec.n, s.k_min + (i / n_range) % k_range);
  spec.seed = seed;
  return spec;
}

}  // namespace

std::string format_check(const CheckResult& c) {
  std::ostringstream os;
  os << (c.passed ? "PASS" : "FAIL") << ' ';
  if (c.criterion > 0) os << '[' << c.criterion << "] ";
  os << c.name << ": worst=" << sci(c.worst) << (c.at_least ? " min=" : " limit=") << sci(c.limit);
  if (!c.detail.empty()) os << " (" << c.detail << ')';
  char buf[32];
  std::snprintf(buf, sizeof buf, " %.1fs", c.seconds);
  os << buf;
  return os.str();
}

MiqpInstance random_indicator_instance(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  MiqpInstance inst;
  inst.n = n;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  inst.Q = m.transpose() * m / n;
  for (int i = 0; i < n; ++i) inst.Q(i, i) += uniform(0.2, 1.0);
  inst.Q = 0.5 * (inst.Q + inst.Q.transpose()).eval();
  inst.g.resize(n);
  inst.h.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.g(i) = uniform(-3.0, 3.0);
    inst.h(i) = uniform(0.0, 0.5);
  }
  Matrix a = Matrix::Zero(2, n);
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < n; ++i)
      if (unit(rng) < 0.6) a(r, i) = uniform(-1.0, 1.0);
  inst.A = to_sparse(a);
  inst.b = Vector(2);
  inst.b << uniform(0.5, 1.5), uniform(0.5, 1.5);
  Matrix c = Matrix::Zero(2 * n, n);
  Matrix d = Matrix::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    const double u = uniform(0.5, 2.0);
    c(2 * i, i) = 1.0;
    c(2 * i + 1, i) = -1.0;
    d(2 * i, i) = u;
    d(2 * i + 1, i) = u;
  }
  inst.C = to_sparse(c);
  inst.D = to_sparse(d);
  inst.name = "random_n" + std::to_string(n) + "_s" + std::to_string(seed);
  inst.seed = seed;
  inst.generator = "mt19937_64/random-indicator/v1";
  validate(inst);
  return inst;
}

QpProblem random_qp(int m, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  QpProblem prob;
  Matrix b(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) b(i, j) = normal(rng);
  prob.H = b.transpose() * b / m + 0.1 * Matrix::Identity(m, m);
  prob.H = 0.5 * (prob.H + prob.H.transpose()).eval();
  prob.c.resize(m);
  for (int i = 0; i < m; ++i) prob.c(i) = 3.0 * normal(rng);
  prob.G.resize(p, m);
  for (int r = 0; r < p; ++r)
    for (int i = 0; i < m; ++i) prob.G(r, i) = normal(rng);
  Vector y0(m);
  for (int i = 0; i < m; ++i) y0(i) = normal(rng);
  prob.rhs = prob.G * y0;
  for (int r = 0; r < p; ++r) prob.rhs(r) += unit(rng);
  return prob;
}

QpOracleResult enumerate_active_sets(const QpProblem& prob) {
  const auto m = static_cast<int>(prob.num_vars());
  const auto p = static_cast<int>(prob.num_rows());
  QpOracleResult best;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    std::vector<int> w;
    for (int r = 0; r < p; ++r)
      if (mask & (1u << r)) w.push_back(r);
    const auto q = static_cast<int>(w.size());
    if (q > m) continue;
    Matrix kkt = Matrix::Zero(m + q, m + q);
    Vector rhs(m + q);
    kkt.topLeftCorner(m, m) = 2.0 * prob.H;
    rhs.head(m) = -prob.c;
    for (int j = 0; j < q; ++j) {
      kkt.block(0, m + j, m, 1) = prob.G.row(w[static_cast<std::size_t>(j)]).transpose();
      kkt.block(m + j, 0, 1, m) = prob.G.row(w[static_cast<std::size_t>(j)]);
      rhs(m + j) = prob.rhs(w[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (lu.rank() < m + q) continue;
    const Vector z = lu.solve(rhs);
    const Vector y = z.head(m);
    if (q > 0 && z.tail(q).minCoeff() < -1e-9) continue;
    const Vector slack = prob.G * y - prob.rhs;
    if (p > 0 && slack.maxCoeff() > 1e-9 * (1.0 + prob.rhs.cwiseAbs().maxCoeff())) continue;
    const double f = y.dot(prob.H * y) + prob.c.dot(y);
    if (!best.feasible || f < best.objective) {
      best.feasible = true;
      best.y = y;
      best.objective = f;
    }
  }
  return best;
}

std::vector<CheckResult> check_exactness(const ExactnessSuite& suite, std::ostream* progress) {
  const auto t0 = Clock::now();
  CheckResult exact = make_check(1, "oracle exactness (persp, persp-ro vs brute force)", 1e-6);
  CheckResult audit = make_check(2, "cut validity (audit_cut over every logged cut)", 1e-7);
  CheckResult finite = make_check(6, "finite convergence (multi-tree iterations / feasible binaries)", 1.0);
  long cuts_audited = 0;
  long duplicates = 0;
  long failures = 0;
  std::string first_error;

  SolverSettings settings;
  settings.gap = 1e-9;
  settings.time_limit = 60.0;
  for (int i = 0; i < suite.instances; ++i) {
    const std::uint64_t seed = suite.first_seed + static_cast<std::uint64_t>(i);
    const PortfolioSpec spec = exactness_spec(suite, seed);
    try {
      const MiqpInstance inst = generate_portfolio(spec);
      const EnumerationReport report = brute_force(inst);
      const double scale = std::max(1.0, std::abs(report.optimum));
      double inst_err = 0.0;
      const auto run = [&](CutSource method, OaMode mode) {
        SolverSettings s = settings;
        s.method = method;
        s.mode = mode;
        OaResult res = run_solver(inst, s, true);
        const double err = res.status == OaStatus::Optimal
                               ? std::abs(res.objective - report.optimum) / scale
                               : std::numeric_limits<double>::infinity();
        inst_err = std::max(inst_err, err);
        for (const Cut& cut : res.cut_log) {
          audit.worst = std::max(audit.worst, audit_cut(inst, cut, report));
          ++cuts_audited;
        }
        return res;
      };
      run(CutSource::Persp, OaMode::SingleTree);
      run(CutSource::PerspRo, OaMode::SingleTree);
      const OaResult multi = run(CutSource::Persp, OaMode::MultiTree);
      exact.worst = std::max(exact.worst, inst_err);

      std::set<std::vector<double>> seen;
      for (const Vector& x : multi.multi_tree_points) {
        if (!seen.insert(std::vector<double>(x.data(), x.data() + x.size())).second) ++duplicates;
      }
      const double ratio = static_cast<double>(multi.iterations) /
                           static_cast<double>(std::max(1L, report.feasible_count));
      finite.worst = std::max(finite.worst, ratio);
      if (progress) {
        *progress << "  " << inst.name << " opt=" << report.optimum << " err=" << sci(inst_err)
                  << " multi-iter=" << multi.iterations << "/" << report.feasible_count << '\n';
      }
    } catch (const std::exception& e) {
      ++failures;
      if (first_error.empty()) first_error = e.what();
    }
  }
  const double elapsed = since(t0);
  const std::string common = std::to_string(suite.instances) + " instances";
  exact.detail = common + ", " + sci(elapsed) + "s of " + sci(suite.time_budget) + "s budget";
  exact.passed = failures == 0 && elapsed <= suite.time_budget;
  audit.detail = std::to_string(cuts_audited) + " cuts";
  audit.passed = failures == 0 && cuts_audited > 0;
  finite.detail = std::to_string(duplicates) + " repeated points";
  finite.passed = failures == 0 && duplicates == 0;
  if (failures > 0) {
    const std::string msg = "; " + std::to_string(failures) + " errors, first: " + first_error;
    exact.detail += msg;
    audit.detail += msg;
    finite.detail += msg;
  }
  return {finish(exact, t0), finish(audit, t0), finish(finite, t0)};
}

CheckResult check_bc_equivalence(int instances, int points, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(3, "bc equivalence (||t_bc - t_persp||_inf, uniform delta)", 1e-6);
  std::mt19937_64 rng(seed);
  long compared = 0;
  try {
    for (int i = 0; i < instances; ++i) {
      const int n = 2 + i % 11;
      const MiqpInstance inst = random_indicator_instance(n, seed * 1000 + static_cast<std::uint64_t>(i));
      const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::UniformMinEig);
      for (int p = 0; p < points; ++p) {
        const Vector x = random_binary(n, rng);
        const Subproblem sub = solve_subproblem(inst, d, x);
        const Cut persp = cut_persp(inst, d, x, sub);
        const Cut bc = cut_bc(inst, d, x, sub);
        r.worst = std::max(r.worst, (bc.t - persp.t).cwiseAbs().maxCoeff());
        ++compared;
      }
    }
    r.detail = std::to_string(compared) + " points";
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

CheckResult check_dominance(int points, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(4, "persp-ro dominance (min sum over S_C of t_ro - t_persp)", -1e-8, true);
  double worst_marginal = 0.0;
  double min_diff = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  int done = 0;
  int skipped = 0;
  try {
    for (int i = 0; done < points; ++i) {
      const bool portfolio = i % 2 == 1;
      const int n = 4 + i % 9;
      const MiqpInstance inst =
          portfolio ? generate_portfolio({n, std::min(n, 5), seed + static_cast<std::uint64_t>(i)})
                    : random_indicator_instance(n, seed * 7919 + static_cast<std::uint64_t>(i));
      const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
      for (int p = 0; p < 10 && done < points; ++p) {
        std::uniform_int_distribution<int> size_dist(portfolio ? 3 : 0, portfolio ? std::min(n, 5) : n);
        const Vector x = random_subset(n, size_dist(rng), rng);
        const Subproblem sub = solve_subproblem(inst, d, x);
        if (!sub.feasible) {
          ++skipped;
          continue;
        }
        const Cut persp = cut_persp(inst, d, x);
        const Cut ro = cut_persp_ro(inst, d, x);
        double diff = 0.0;
        for (int j = 0; j < n; ++j)
          if (x(j) == 0.0) diff += ro.t(j) - persp.t(j);
        min_diff = std::min(min_diff, diff);
        worst_marginal = std::max(worst_marginal, std::abs(ro.marginal_value - persp.marginal_value));
        ++done;
      }
    }
    r.worst = min_diff;
    r.passed = worst_marginal <= 1e-9;
    r.detail = std::to_string(done) + " points, " + std::to_string(skipped) +
               " infeasible skipped, marginal gap " + sci(worst_marginal) + " (limit 1e-09)";
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

CheckResult check_subgradients(int points, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(5, "subgradient vs finite differences (step 1e-5)", 1e-4);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  int done = 0;
  int rejected = 0;
  const int max_attempts = 20 * points;
  try {
    for (int i = 0; done < points && done + rejected < max_attempts; ++i) {
      const int n = 2 + i % 7;
      const MiqpInstance inst = random_indicator_instance(n, seed * 104729 + static_cast<std::uint64_t>(i));
      const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::Auto);
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = frac(rng);
      Vector fd;
      try {
        fd = fd_subgradient(inst, d, x, 1e-5);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonSmoothPoint) throw;
        ++rejected;
        continue;
      }
      const Cut cut = cut_persp(inst, d, x);
      r.worst = std::max(r.worst, (cut.t - fd).cwiseAbs().maxCoeff());
      ++done;
    }
    r.passed = done == points;
    r.detail = std::to_string(done) + " admissible points, " + std::to_string(rejected) +
               " non-smooth rejected";
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

CheckResult check_qp_solver(int problems, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(8, "QP solver vs active-set enumeration", 1e-7);
  double worst_kkt = 0.0;
  try {
    for (int i = 0; i < problems; ++i) {
      const int m = 1 + i % 12;
      const int p = (i * 7) % 9;
      const QpProblem prob = random_qp(m, p, seed + static_cast<std::uint64_t>(i));
      const QpOracleResult oracle = enumerate_active_sets(prob);
      const QpSolution sol = solve_qp(prob);
      if (!oracle.feasible || sol.status != QpStatus::Optimal) {
        r.passed = false;
        r.detail = "status mismatch on problem " + std::to_string(i);
        break;
      }
      const double f_err =
          std::abs(sol.objective - oracle.objective) / std::max(1.0, std::abs(oracle.objective));
      const double y_err = (sol.y - oracle.y).cwiseAbs().maxCoeff() /
                           std::max(1.0, oracle.y.cwiseAbs().maxCoeff());
      r.worst = std::max({r.worst, f_err, y_err});
      worst_kkt = std::max(worst_kkt, kkt_report(prob, sol).worst_relative());
    }
    if (r.detail.empty()) {
      r.passed = worst_kkt <= 1e-8;
      r.detail = std::to_string(problems) + " problems, worst KKT residual " + sci(worst_kkt) +
                 " (limit 1e-08)";
    }
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

CheckResult check_decompositions(int instances) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(9, "decomposition invariants (worst measured / allowed)", 1.0);
  double recon = 0.0, psd = 0.0, rank_one = 0.0, low_rank = 0.0, delta_slack = 0.0;
  bool full_rank = true;
  int checked = 0;
  try {
    for (int i = 1; i <= instances; ++i) {
      const int n = 4 + i % 37;
      const std::optional<int> k =
          i % 5 == 0 ? std::nullopt : std::optional<int>(std::min(n, 3 + i % 6));
      const MiqpInstance inst = generate_portfolio({n, k, static_cast<std::uint64_t>(i)});
      const double q_norm = inf_norm(inst.Q);
      const double rel = 1e-8 * (1.0 + q_norm);
      for (DiagonalStrategy s : {DiagonalStrategy::DiagDominance, DiagonalStrategy::UniformMinEig,
                                 DiagonalStrategy::DominanceShift, DiagonalStrategy::Auto}) {
        const Decomposition d = decompose(inst.Q, inst.g, s);
        Matrix rebuilt = d.remainder;
        rebuilt.diagonal() += d.delta;
        recon = std::max(recon, inf_norm(rebuilt - inst.Q) / rel);
        const double psd_floor = 1e-6 * q_norm;
        psd = std::max(psd, -min_eigenvalue_bound(d.remainder) / psd_floor);
        psd = std::max(psd, -min_eigenvalue_bound(d.residual) / psd_floor);
        const Matrix ll = d.rank_one * d.rank_one.transpose();
        rank_one = std::max(rank_one, inf_norm(ll + d.residual - d.remainder) / rel);
        const Matrix& e = d.low_rank;
        low_rank = std::max(low_rank, inf_norm(e.transpose() * e - d.remainder) / rel);
        if (e.rows() > 0) {
          Eigen::JacobiSVD<Matrix> svd(e);
          const auto sv = svd.singularValues();
          if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) full_rank = false;
        }
        delta_slack = std::min(delta_slack, d.delta.minCoeff() - d.delta_min);
        ++checked;
      }
    }
    r.worst = std::max({recon, psd, rank_one, low_rank});
    r.passed = full_rank && delta_slack >= 0.0;
    r.detail = std::to_string(checked) + " decompositions; reconstruction " + sci(recon) +
               ", psd " + sci(psd) + ", L/N " + sci(rank_one) + ", E " + sci(low_rank) +
               ", delta-delta_min " + (delta_slack >= 0.0 ? "ok" : sci(delta_slack)) +
               ", E full row rank " + (full_rank ? "yes" : "no");
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

namespace {

// Q = (1 + delta) I with R = I, g = (-2, -2), no rows. Returns the worst
// audit violation of the strengthened cuts at every binary point.
double mutation_violation(double delta, RoCoefficient coefficient) {
  MiqpInstance inst;
  inst.n = 2;
  inst.Q = (1.0 + delta) * Matrix::Identity(2, 2);
  inst.g = Vector::Constant(2, -2.0);
  inst.h = Vector::Zero(2);
  inst.A = SparseMatrix(0, 2);
  inst.b = Vector(0);
  inst.C = SparseMatrix(0, 2);
  inst.D = SparseMatrix(0, 2);
  validate(inst);
  const Decomposition d =
      low_rank_factor(rank_one_factors(with_delta(inst.Q, Vector::Constant(2, delta))), inst.g);
  const EnumerationReport report = brute_force(inst);
  double worst = -std::numeric_limits<double>::infinity();
  for (const EnumerationRow& row : report.rows) {
    if (!row.feasible) continue;
    worst = std::max(worst, audit_cut(inst, cut_persp_ro(inst, d, row.x, coefficient), report));
  }
  return worst;
}

}  // namespace

CheckResult check_mutation() {
  const auto t0 = Clock::now();
  CheckResult r = make_check(0, "mutation (delta^2/4 coefficient caught by audit_cut at delta = 0.25)", 1e-7, true);
  try {
    const double mutant = mutation_violation(0.25, RoCoefficient::DeltaSquaredOver4);
    const double correct = mutation_violation(0.25, RoCoefficient::DeltaOver4);
    const double mutant_big = mutation_violation(4.0, RoCoefficient::DeltaSquaredOver4);
    r.worst = mutant;
    r.passed = correct <= 1e-7;
    r.detail = "correct cut violation " + sci(correct) + "; at delta = 4 the mutant gives " +
               sci(mutant_big) + " since delta^2/4 > delta/4 only weakens the cut";
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

CheckResult check_benchmark(const BenchmarkSuite& suite, std::ostream* progress) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(7, "scaled benchmark (max time per instance, s)", suite.time_limit);
  BenchSpec spec;
  spec.sizes = {suite.n};
  for (int k : suite.ks) spec.ks.emplace_back(k);
  spec.seeds = suite.seeds;
  spec.methods = {CutSource::Persp};
  spec.solver.gap = suite.gap;
  spec.solver.time_limit = suite.time_limit;
  spec.threads = suite.threads;
  std::ostringstream csv;
  csv << kBenchHeader << '\n';
  int solved = 0, rows = 0, aggregates = 0;
  double worst_gap = 0.0;
  try {
    run_bench(spec, [&](const BenchRow& row) {
      csv << format_bench_row(row) << '\n';
      if (progress) *progress << "  " << format_bench_row(row) << '\n';
      if (row.aggregate) {
        ++aggregates;
        return;
      }
      ++rows;
      r.worst = std::max(r.worst, row.time);
      worst_gap = std::max(worst_gap, row.gap_percent);
      if (row.status == "optimal" && row.gap_percent <= 100.0 * suite.gap) ++solved;
    });
    // Schema: the header line and ten fields on every row.
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    bool schema = line == kBenchHeader;
    while (std::getline(lines, line)) {
      schema = schema && std::count(line.begin(), line.end(), ',') == 9;
    }
    const int expected = static_cast<int>(suite.ks.size()) * suite.seeds;
    r.passed = schema && rows == expected && aggregates == static_cast<int>(suite.ks.size()) &&
               solved == expected;
    r.detail = std::to_string(solved) + "/" + std::to_string(expected) + " at gap <= " +
               sci(suite.gap) + ", worst gap " + sci(worst_gap) + "%, CSV schema " +
               (schema ? "ok" : "broken");
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

namespace {

double median_cut_time(int n, int k, int samples, std::uint64_t seed) {
  const MiqpInstance inst = generate_portfolio({n, k, 1});
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
  std::mt19937_64 rng(seed);
  std::vector<double> times;
  int attempts = 0;
  while (static_cast<int>(times.size()) < samples && attempts < 20 * samples) {
    ++attempts;
    const Vector x = random_subset(n, k, rng);
    const auto t0 = Clock::now();
    const Subproblem sub = solve_subproblem(inst, d, x);
    if (!sub.feasible) continue;
    const Cut cut = cut_persp(inst, d, x, sub);
    const double t = since(t0);
    if (cut.t.size() == n) times.push_back(t);
  }
  if (times.empty()) throw Error(ErrorCode::Infeasible, "no feasible sample points");
  std::nth_element(times.begin(), times.begin() + static_cast<long>(times.size() / 2), times.end());
  return times[times.size() / 2];
}

}  // namespace

CheckResult check_cut_scaling(int n_small, int n_large, int k, int samples, double max_ratio) {
  const auto t0 = Clock::now();
  CheckResult r = make_check(7,
                             "cut cost scaling (median time ratio n=" + std::to_string(n_large) +
                                 " / n=" + std::to_string(n_small) + ")",
                             max_ratio);
  try {
    median_cut_time(n_small, k, std::max(5, samples / 10), 99);  // warm caches
    const double small = median_cut_time(n_small, k, samples, 7);
    const double large = median_cut_time(n_large, k, samples, 7);
    r.worst = large / small;
    r.detail = "medians " + sci(small * 1e6) + "us and " + sci(large * 1e6) + "us at k=" +
               std::to_string(k);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return finish(r, t0);
}

std::vector<CheckResult> run_verification(VerifyLevel level, std::ostream* progress, int threads) {
  const bool full = level == VerifyLevel::Full;
  std::vector<CheckResult> out;
  const auto add = [&](CheckResult c) {
    if (progress) *progress << format_check(c) << std::endl;
    out.push_back(std::move(c));
  };

  ExactnessSuite exact;
  if (!full) {
    exact.instances = 8;
    exact.n_max = 11;
    exact.k_max = 4;
    exact.time_budget = 30.0;
  }
  for (CheckResult& c : check_exactness(exact, nullptr)) add(std::move(c));
  add(check_bc_equivalence(full ? 50 : 10, 5, 11));
  add(check_dominance(full ? 200 : 50, 13));
  add(check_subgradients(full ? 100 : 25, 17));
  add(check_qp_solver(full ? 200 : 50, 19));
  add(check_decompositions(full ? 100 : 25));
  add(check_mutation());

  BenchmarkSuite bench;
  bench.threads = threads;
  if (!full) {
    bench.n = 40;
    bench.ks = {6, 8};
    bench.seeds = 2;
    bench.time_limit = 60.0;
  }
  add(check_benchmark(bench, nullptr));
  add(check_cut_scaling(60, 120, 6, full ? 400 : 100, 3.0));
  return out;
}

}  // namespace miqp::tools
