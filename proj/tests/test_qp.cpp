#include <doctest.h>

#include "miqp/error.hpp"
#include "miqp/qp.hpp"
#include "support.hpp"
#include "verify.hpp"

using namespace miqp;
using namespace miqp::testing;

TEST_CASE("solve_qp examples") {
  SUBCASE("one variable at its bound") {
    const QpProblem p{mat({{1}}), vec({-2}), mat({{1}}), vec({0.5})};
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::Optimal);
    CHECK(s.y(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.duals(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.objective == doctest::Approx(-0.75).epsilon(1e-14));
  }
  SUBCASE("unconstrained pure quadratic") {
    const QpProblem p{Matrix::Identity(2, 2), Vector::Zero(2), Matrix(0, 2), Vector(0)};
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::Optimal);
    CHECK(max_abs(s.y) == 0.0);
    CHECK(s.objective == 0.0);
  }
  SUBCASE("symmetric budget row") {
    const QpProblem p{Matrix::Identity(2, 2), vec({-2, -2}), mat({{1, 1}}), vec({1})};
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::Optimal);
    CHECK(s.y(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.y(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.duals(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.objective == doctest::Approx(-1.5).epsilon(1e-14));
  }
}

TEST_CASE("solve_qp reports infeasibility with a Farkas vector") {
  // y <= -1 and -y <= -1 (y >= 1).
  const QpProblem p{mat({{1}}), vec({0}), mat({{1}, {-1}}), vec({-1, -1})};
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Infeasible);
  REQUIRE(s.farkas.size() == 2);
  CHECK(s.farkas.minCoeff() >= 0.0);
  CHECK(std::abs((p.G.transpose() * s.farkas)(0)) < 1e-12);
  CHECK(p.rhs.dot(s.farkas) < 0.0);
}

TEST_CASE("solve_qp reports unbounded problems") {
  // H = 0 with c pushing y to -infinity and no rows.
  const QpProblem p{Matrix::Zero(1, 1), vec({1}), Matrix(0, 1), Vector(0)};
  CHECK(solve_qp(p).status == QpStatus::Unbounded);
}

TEST_CASE("warm start reproduces the cold solution") {
  const QpProblem p = tools::random_qp(8, 6, 42);
  const QpSolution cold = solve_qp(p);
  const QpSolution warm = solve_qp(p, cold.active_set);
  CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-12));
  CHECK(warm.iterations <= cold.iterations);
  // A nonsense warm start is dropped quietly.
  const std::vector<int> junk{0, 1, 2, 3, 4, 5};
  CHECK(solve_qp(p, junk).objective == doctest::Approx(cold.objective).epsilon(1e-10));
}

TEST_CASE("set_free_duals_to_zero") {
  QpSolution s;
  s.duals = vec({1, 0.3});
  const std::vector<int> row2{1};
  const QpSolution a = set_free_duals_to_zero(s, row2);
  CHECK(a.duals(0) == 1.0);
  CHECK(a.duals(1) == 0.0);
  const QpSolution b = set_free_duals_to_zero(s, {});
  CHECK(b.duals(0) == 1.0);
  CHECK(b.duals(1) == 0.3);
  s.duals = vec({0.2, 0.7});
  const std::vector<int> all{0, 1};
  CHECK(max_abs(set_free_duals_to_zero(s, all).duals) == 0.0);
  CHECK(zero_rows(mat({{0, 0}, {1, 0}, {0, 0}})) == std::vector<int>{0, 2});
}

TEST_CASE("random QPs match active-set enumeration and satisfy KKT") {
  for (int i = 0; i < 120; ++i) {
    const int m = 1 + i % 12;
    const int p = (i * 5) % 9;
    CAPTURE(i);
    const QpProblem prob = tools::random_qp(m, p, 1000 + static_cast<std::uint64_t>(i));
    const tools::QpOracleResult oracle = tools::enumerate_active_sets(prob);
    const QpSolution sol = solve_qp(prob);
    REQUIRE(oracle.feasible);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(std::abs(sol.objective - oracle.objective) <= 1e-7 * std::max(1.0, std::abs(oracle.objective)));
    const KktReport kkt = kkt_report(prob, sol);
    CHECK(kkt.worst_relative() <= 1e-8);
    CHECK(sol.duals.size() == p);
    if (p > 0) CHECK(sol.duals.minCoeff() >= 0.0);
  }
}

TEST_CASE("degenerate rows: duplicated constraints") {
  // Two copies of the same active row; duals split but KKT holds.
  const QpProblem p{Matrix::Identity(2, 2), vec({-2, -2}), mat({{1, 1}, {1, 1}, {1, 0}}),
                    vec({1, 1, 5})};
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(kkt_report(p, s).worst_relative() <= 1e-8);
}
