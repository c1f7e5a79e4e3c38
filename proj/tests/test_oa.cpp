#include <doctest.h>

#include <sstream>

#include "miqp/error.hpp"
#include "miqp/oa.hpp"
#include "miqp/oracle.hpp"
#include "support.hpp"
#include "verify.hpp"

using namespace miqp;
using namespace miqp::testing;

namespace {

MiqpInstance single_variable() {
  MiqpInstance inst;
  inst.n = 1;
  inst.Q = Matrix::Constant(1, 1, 2.0);
  inst.g = Vector::Constant(1, -2.0);
  inst.h = Vector::Constant(1, 0.25);
  inst.A = SparseMatrix(0, 1);
  inst.b = Vector(0);
  inst.C = SparseMatrix(0, 1);
  inst.D = SparseMatrix(0, 1);
  inst.k = 1;
  inst.name = "single";
  return inst;
}

OaConfig config(CutSource source, OaMode mode, double gap = 1e-9) {
  OaConfig c;
  c.cut_source = source;
  c.mode = mode;
  c.gap_tol = gap;
  c.time_limit = 120.0;
  return c;
}

struct FrozenOptimum {
  const char* file;
  double value;
};

// Independent conic-solver enumeration (tests/tools/independent_oracle.py).
constexpr FrozenOptimum kFrozen[] = {
    {"portfolio_n10_k4_s1.miqp", 31.798278374287},
    {"portfolio_n12_k5_s3.miqp", 53.074625499636},
    {"portfolio_n9_knone_s2.miqp", 19.094685621368},
};

}  // namespace

TEST_CASE("root bounds on the worked instance") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  CHECK(qp_relax_bound(inst) == doctest::Approx(-1.0).epsilon(1e-9));
  const double kelley = root_lower_bound(inst, d, OaConfig{});
  CHECK(kelley <= -1.0 + 1e-6);
  CHECK(kelley >= -1.0 - 1e-9);
  CHECK(trivial_bound(inst) <= kelley);

  OaConfig explicit_cfg;
  explicit_cfg.root_bound = RootBound::Explicit;
  explicit_cfg.explicit_lb = -3.0;
  CHECK(root_lower_bound(inst, d, explicit_cfg) == -3.0);
  explicit_cfg.explicit_lb.reset();
  CHECK_THROWS_AS(root_lower_bound(inst, d, explicit_cfg), Error);
}

TEST_CASE("a large fixed cost makes the empty selection optimal") {
  MiqpInstance inst = worked_instance();
  inst.h = Vector::Constant(2, 10.0);
  const Decomposition d = worked_decomposition(inst);
  for (OaMode mode : {OaMode::SingleTree, OaMode::MultiTree}) {
    const OaResult res = solve(inst, d, config(CutSource::Persp, mode));
    REQUIRE(res.status == OaStatus::Optimal);
    CHECK(res.objective == doctest::Approx(0.0));
    CHECK(res.x_opt.isZero());
  }
}

TEST_CASE("worked instance in every configuration") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  for (OaMode mode : {OaMode::SingleTree, OaMode::MultiTree}) {
    CAPTURE(to_string(mode));
    const OaResult p = solve(inst, d, config(CutSource::Persp, mode));
    const OaResult r = solve(inst, d, config(CutSource::PerspRo, mode));
    REQUIRE(p.status == OaStatus::Optimal);
    REQUIRE(r.status == OaStatus::Optimal);
    CHECK(p.objective == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(max_abs(p.x_opt - vec({1, 1})) == 0.0);
    CHECK(max_abs(p.y_opt - vec({0.5, 0.5})) <= 1e-9);
    CHECK(r.cuts <= p.cuts);
  }
}

TEST_CASE("single variable") {
  const MiqpInstance inst = single_variable();
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::Auto);
  const OaResult res = solve(inst, d, config(CutSource::PerspRo, OaMode::SingleTree));
  REQUIRE(res.status == OaStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(res.x_opt(0) == 1.0);
}

TEST_CASE("frozen optima of the fixture instances") {
  for (const FrozenOptimum& f : kFrozen) {
    const MiqpInstance inst = read_instance(fixture(f.file));
    for (DiagonalStrategy s : {DiagonalStrategy::DominanceShift, DiagonalStrategy::Auto}) {
      const Decomposition d = decompose(inst.Q, inst.g, s);
      for (CutSource src : {CutSource::Persp, CutSource::PerspRo}) {
        for (OaMode mode : {OaMode::SingleTree, OaMode::MultiTree}) {
          CAPTURE(f.file);
          CAPTURE(to_string(s));
          CAPTURE(to_string(src));
          CAPTURE(to_string(mode));
          const OaResult res = solve(inst, d, config(src, mode));
          REQUIRE(res.status == OaStatus::Optimal);
          CHECK(std::abs(res.objective - f.value) <= 1e-8 * std::abs(f.value));
          CHECK(std::abs(inst.objective(res.x_opt, res.y_opt) - res.objective) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("infeasible instance") {
  const MiqpInstance inst = read_instance(fixture("infeasible.miqp"));
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::Auto);
  CHECK_THROWS_AS(qp_relax_bound(inst), Error);
  for (OaMode mode : {OaMode::SingleTree, OaMode::MultiTree}) {
    const OaResult res = solve(inst, d, config(CutSource::Persp, mode));
    CHECK(res.status == OaStatus::Infeasible);
    CHECK(res.x_opt.size() == 0);
  }
}

TEST_CASE("time limit") {
  const MiqpInstance inst = generate_portfolio({60, 6, 1});
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DiagDominance);
  OaConfig c = config(CutSource::Persp, OaMode::SingleTree, 1e-4);
  c.time_limit = 0.05;
  const OaResult res = solve(inst, d, c);
  CHECK(res.status == OaStatus::TimeLimit);
  CHECK(res.wall_time <= 5.0);
  if (std::isfinite(res.objective)) CHECK(res.lower_bound <= res.objective + 1e-9);
}

TEST_CASE("result invariants on random instances") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const MiqpInstance inst = tools::random_indicator_instance(7, 100 + seed);
    const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
    const EnumerationReport truth = brute_force(inst);
    const double qp_bound = qp_relax_bound(inst);
    for (CutSource src : {CutSource::Persp, CutSource::PerspRo}) {
      for (OaMode mode : {OaMode::SingleTree, OaMode::MultiTree}) {
        CAPTURE(seed);
        OaConfig c = config(src, mode);
        c.record_cuts = true;
        const OaResult res = solve(inst, d, c);
        REQUIRE(res.status == OaStatus::Optimal);
        CHECK(res.gap >= -1e-12);
        CHECK(res.objective == doctest::Approx(truth.optimum).epsilon(1e-9));
        CHECK(res.objective == doctest::Approx(marginal_value(inst, d, res.x_opt)).epsilon(1e-9));
        // qp relaxation <= Kelley root <= lower bound <= optimum.
        const double slack = 1e-6 * std::max(1.0, std::abs(truth.optimum));
        CHECK(qp_bound <= res.root_bound + slack);
        CHECK(res.root_bound <= truth.optimum + 1e-9);
        CHECK(res.lower_bound <= res.objective + 1e-9);
        CHECK(res.min_bound_step >= -1e-9);
        CHECK(res.max_kkt_residual <= 1e-8);
        for (const Cut& cut : res.cut_log) CHECK(audit_cut(inst, cut, truth) <= 1e-7);
      }
    }
  }
}

TEST_CASE("invalid configurations") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  OaConfig c;
  c.gap_tol = 0.0;
  CHECK_THROWS_AS(solve(inst, d, c), Error);
  c = OaConfig{};
  c.time_limit = -1.0;
  CHECK_THROWS_AS(solve(inst, d, c), Error);
  c = OaConfig{};
  c.cut_source = CutSource::Bc;
  CHECK_THROWS_AS(solve(inst, d, c), Error);
  c = OaConfig{};
  c.cut_source = CutSource::PerspRo;
  CHECK_THROWS_AS(solve(inst, with_delta(inst.Q, Vector::Ones(2)), c), Error);
}

TEST_CASE("node log") {
  const MiqpInstance inst = read_instance(fixture("portfolio_n10_k4_s1.miqp"));
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
  std::ostringstream log;
  OaConfig c = config(CutSource::Persp, OaMode::SingleTree);
  c.node_log = &log;
  const OaResult res = solve(inst, d, c);
  REQUIRE(res.status == OaStatus::Optimal);
  const std::string text = log.str();
  CHECK(text.rfind("# node", 0) == 0);
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines >= 2);
}

TEST_CASE("heuristic and plunging do not change the optimum") {
  for (const FrozenOptimum& f : kFrozen) {
    const MiqpInstance inst = read_instance(fixture(f.file));
    const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DiagDominance);
    for (bool plunge : {false, true}) {
      OaConfig c = config(CutSource::PerspRo, OaMode::SingleTree);
      c.heuristic_every = 5;
      c.plunge = plunge;
      const OaResult res = solve(inst, d, c);
      CAPTURE(f.file);
      REQUIRE(res.status == OaStatus::Optimal);
      CHECK(std::abs(res.objective - f.value) <= 1e-8 * std::abs(f.value));
    }
  }
}

TEST_CASE("root cuts can be dropped") {
  const MiqpInstance inst = read_instance(fixture("portfolio_n12_k5_s3.miqp"));
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
  OaConfig c = config(CutSource::Persp, OaMode::MultiTree);
  c.keep_root_cuts = false;
  const OaResult res = solve(inst, d, c);
  REQUIRE(res.status == OaStatus::Optimal);
  CHECK(std::abs(res.objective - kFrozen[1].value) <= 1e-8 * kFrozen[1].value);
  CHECK(res.iterations >= 1);
}
