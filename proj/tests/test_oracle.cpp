#include <doctest.h>

#include "miqp/cuts.hpp"
#include "miqp/error.hpp"
#include "miqp/oracle.hpp"
#include "support.hpp"

using namespace miqp;
using namespace miqp::testing;

namespace {

double row_value(const EnumerationReport& r, const Vector& x) {
  for (const EnumerationRow& row : r.rows)
    if (row.x == x) return row.value;
  FAIL("row not found");
  return 0.0;
}

}  // namespace

TEST_CASE("brute_force on the worked instance") {
  const EnumerationReport r = brute_force(worked_instance());
  REQUIRE(r.rows.size() == 4);
  CHECK(r.feasible_count == 4);
  CHECK(row_value(r, vec({0, 0})) == 0.0);
  CHECK(row_value(r, vec({1, 0})) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(row_value(r, vec({0, 1})) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(row_value(r, vec({1, 1})) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r.optimum == doctest::Approx(-1.0).epsilon(1e-14));
  REQUIRE(r.argmin.size() == 1);
  CHECK(r.rows[static_cast<std::size_t>(r.argmin[0])].x == vec({1, 1}));
  // Gray-code order: consecutive rows differ in one coordinate.
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK((r.rows[i].x - r.rows[i - 1].x).cwiseAbs().sum() == 1.0);
  }
}

TEST_CASE("brute_force respects k") {
  const EnumerationReport r = brute_force(worked_instance(1));
  CHECK(r.rows.size() == 3);
  CHECK(r.optimum == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(r.argmin.size() == 2);
}

TEST_CASE("brute_force on an infeasible instance") {
  MiqpInstance inst = worked_instance();
  Matrix a(2, 2);
  a << 1, 1, -1, -1;  // sum y <= -1 and sum y >= 1
  inst.A = a.sparseView();
  inst.b = vec({-1, -1});
  const EnumerationReport r = brute_force(inst);
  CHECK(r.feasible_count == 0);
  CHECK(std::isinf(r.optimum));
  for (const EnumerationRow& row : r.rows) CHECK_FALSE(row.feasible);
}

TEST_CASE("brute_force on the one-variable instance") {
  MiqpInstance inst;
  inst.n = 1;
  inst.Q = mat({{2}});
  inst.g = vec({-2});
  inst.h = vec({0});
  inst.A = SparseMatrix(0, 1);
  inst.b = Vector(0);
  inst.C = SparseMatrix(0, 1);
  inst.D = SparseMatrix(0, 1);
  inst.k = 1;
  CHECK(brute_force(inst).optimum == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("brute_force guards its size") {
  const MiqpInstance inst = sample_portfolio({20, std::nullopt, 1});
  try {
    brute_force(inst);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("brute_force agrees with frozen independent optima") {
  // Optima from a separate cvxpy enumeration of the same fixture files.
  CHECK(brute_force(read_instance(fixture("portfolio_n10_k4_s1.miqp"))).optimum ==
        doctest::Approx(31.798278374287).epsilon(1e-10));
  CHECK(brute_force(read_instance(fixture("portfolio_n12_k5_s3.miqp"))).optimum ==
        doctest::Approx(53.074625499636).epsilon(1e-10));
  CHECK(brute_force(read_instance(fixture("portfolio_n9_knone_s2.miqp"))).optimum ==
        doctest::Approx(19.094685621368).epsilon(1e-10));
}

TEST_CASE("audit_cut") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  const EnumerationReport r = brute_force(inst);
  const Cut persp = cut_persp(inst, d, vec({1, 0}));
  const double v = audit_cut(inst, persp, r);
  CHECK(v <= 0.0);
  CHECK(v >= -1e-14);  // tight at the generating point
  Cut raised = persp;
  raised.offset += 1.0;
  CHECK(audit_cut(inst, raised, r) == doctest::Approx(1.0).epsilon(1e-12));
  const Cut ro = cut_persp_ro(inst, d, vec({1, 0}));
  CHECK(audit_cut(inst, ro, r) <= 1e-12);
  const double slack_persp = row_value(r, vec({0, 1})) - persp.evaluate(vec({0, 1}));
  const double slack_ro = row_value(r, vec({0, 1})) - ro.evaluate(vec({0, 1}));
  CHECK(slack_persp == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(slack_ro == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(slack_ro < slack_persp);
}

TEST_CASE("fd_subgradient examples") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  const Vector half = fd_subgradient(inst, d, vec({0.5, 0.5}), 1e-5);
  CHECK(half(0) == doctest::Approx(-4.0 / 9.0).epsilon(1e-8));
  CHECK(half(1) == doctest::Approx(-4.0 / 9.0).epsilon(1e-8));
  const Vector high = fd_subgradient(inst, d, vec({0.9, 0.9}), 1e-5);
  CHECK(high(0) == doctest::Approx(-1.0 / 3.61).epsilon(1e-8));
  CHECK(std::abs(high(0) - high(1)) <= 1e-6);
  CHECK_THROWS_AS(fd_subgradient(inst, d, vec({1e-5, 0.5}), 1e-5), Error);
}

TEST_CASE("fd_subgradient rejects points on a kink") {
  // y_i <= (2/3) x_i becomes active exactly at x_i = 0.5.
  MiqpInstance inst = worked_instance();
  Matrix c = Matrix::Identity(2, 2);
  inst.C = c.sparseView();
  inst.D = (c * (2.0 / 3.0)).sparseView();
  const Decomposition d = worked_decomposition(inst);
  try {
    fd_subgradient(inst, d, vec({0.5, 0.5}), 1e-5);
    FAIL("expected NonSmoothPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSmoothPoint);
  }
  // Away from the kink the bound is either slack or strictly active.
  CHECK_NOTHROW(fd_subgradient(inst, d, vec({0.8, 0.8}), 1e-5));
  CHECK_NOTHROW(fd_subgradient(inst, d, vec({0.3, 0.3}), 1e-5));
}

TEST_CASE("fixed_x_value matches the marginal value at binaries") {
  const MiqpInstance inst = read_instance(fixture("portfolio_n10_k4_s1.miqp"));
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
  Vector x = Vector::Zero(10);
  x(0) = x(5) = x(6) = x(8) = 1.0;
  CHECK(fixed_x_value(inst, x) == doctest::Approx(31.798278374287).epsilon(1e-10));
  CHECK(marginal_value(inst, d, x) == doctest::Approx(fixed_x_value(inst, x)).epsilon(1e-12));
  x.setZero();
  x(0) = 1.0;
  CHECK(std::isinf(fixed_x_value(inst, x)));
}
