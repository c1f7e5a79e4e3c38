#include <doctest.h>

#include <random>

#include "miqp/decompose.hpp"
#include "miqp/error.hpp"
#include "support.hpp"

using namespace miqp;
using namespace miqp::testing;

namespace {

void check_invariants(const Matrix& q, const Decomposition& d) {
  const double qn = inf_norm(q);
  const double rel = 1e-8 * (1.0 + qn);
  CHECK(d.delta.minCoeff() >= d.delta_min);
  Matrix rebuilt = d.remainder;
  rebuilt.diagonal() += d.delta;
  CHECK(inf_norm(rebuilt - q) <= rel);
  CHECK(min_eigenvalue_bound(d.remainder) >= -1e-6 * qn);
  if (d.rank_one_ready) {
    CHECK(min_eigenvalue_bound(d.residual) >= -1e-6 * qn);
    CHECK(inf_norm(d.rank_one * d.rank_one.transpose() + d.residual - d.remainder) <= rel);
  }
  if (d.low_rank_ready) {
    CHECK(inf_norm(d.low_rank.transpose() * d.low_rank - d.remainder) <= rel);
    if (d.low_rank.rows() > 0) {
      Eigen::FullPivLU<Matrix> lu(d.low_rank);
      CHECK(lu.rank() == d.low_rank.rows());
    }
  }
}

}  // namespace

TEST_CASE("extract_diagonal examples") {
  SUBCASE("diag-dominance on [[2,1],[1,2]]") {
    const Decomposition d = extract_diagonal(mat({{2, 1}, {1, 2}}), DiagonalStrategy::DiagDominance);
    CHECK(d.delta(0) == 1.0);
    CHECK(d.delta(1) == 1.0);
    CHECK(max_abs(d.remainder - mat({{1, 1}, {1, 1}})) == 0.0);
  }
  SUBCASE("uniform-min-eig on 2I") {
    const Decomposition d =
        extract_diagonal(2.0 * Matrix::Identity(3, 3), DiagonalStrategy::UniformMinEig);
    for (int i = 0; i < 3; ++i) CHECK(d.delta(i) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(max_abs(d.remainder - Matrix::Identity(3, 3)) <= 1e-6);
  }
  SUBCASE("diag-dominance on [[10,9],[9,10]]") {
    const Decomposition d =
        extract_diagonal(mat({{10, 9}, {9, 10}}), DiagonalStrategy::DiagDominance);
    CHECK(d.delta(0) == 1.0);
    CHECK(d.delta(1) == 1.0);
    CHECK(max_abs(d.remainder - mat({{9, 9}, {9, 9}})) == 0.0);
  }
  SUBCASE("dominance-shift adds the remainder's smallest eigenvalue") {
    // R_dd = [[1,1],[1,1]] has lambda_min 0, so the shift keeps delta.
    const Decomposition d =
        extract_diagonal(mat({{2, 1}, {1, 2}}), DiagonalStrategy::DominanceShift);
    CHECK(d.delta(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(min_eigenvalue_bound(d.remainder) >= -1e-6 * 3.0);
    // Diagonal Q: R_dd = 0 so delta = diag(Q).
    const Decomposition diag =
        extract_diagonal(mat({{3, 0}, {0, 5}}), DiagonalStrategy::DominanceShift);
    CHECK(diag.delta(0) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(diag.delta(1) == doctest::Approx(5.0).epsilon(1e-6));
  }
}

TEST_CASE("extract_diagonal errors and fallback") {
  try {
    extract_diagonal(mat({{1, 2}, {2, 1}}), DiagonalStrategy::DiagDominance);
    FAIL("expected NotPd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPd);
  }
  try {
    extract_diagonal(mat({{1e-7, 0}, {0, 1}}), DiagonalStrategy::UniformMinEig, 1e-6);
    FAIL("expected InfeasibleDelta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleDelta);
  }
  // Dense PD matrix that is far from dominant: auto falls back to uniform.
  Matrix q = Matrix::Constant(4, 4, 0.9);
  q.diagonal().setOnes();
  const Decomposition d = extract_diagonal(q, DiagonalStrategy::Auto);
  CHECK(d.strategy == DiagonalStrategy::UniformMinEig);
  check_invariants(q, d);
}

TEST_CASE("rank_one_factors examples") {
  const auto factors = [](const Matrix& r) {
    Decomposition d;
    d.remainder = r;
    d.delta = Vector::Ones(r.rows());
    return rank_one_factors(d);
  };
  const Decomposition a = factors(mat({{1, 1}, {1, 1}}));
  REQUIRE(a.rank_one.cols() == 1);
  CHECK(std::abs(a.rank_one(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(a.rank_one(1, 0)) == doctest::Approx(1.0));
  CHECK(max_abs(a.residual) == 0.0);

  const Decomposition b = factors(Matrix::Identity(2, 2));
  REQUIRE(b.rank_one.cols() == 2);
  CHECK(max_abs(b.rank_one.cwiseAbs() - Matrix::Identity(2, 2)) < 1e-14);

  const Decomposition c = factors(mat({{9, 9}, {9, 9}}));
  REQUIRE(c.rank_one.cols() == 1);
  CHECK(std::abs(c.rank_one(0, 0)) == doctest::Approx(3.0));
  CHECK(std::abs(c.rank_one(1, 0)) == doctest::Approx(3.0));
}

TEST_CASE("low_rank_factor examples") {
  const auto factor = [](const Matrix& r) {
    Decomposition d;
    d.remainder = r;
    d.delta = Vector::Ones(r.rows());
    return low_rank_factor(d, Vector::Zero(r.rows()));
  };
  const Decomposition id = factor(Matrix::Identity(2, 2));
  CHECK(max_abs(id.low_rank.cwiseAbs() - Matrix::Identity(2, 2)) < 1e-14);
  const Decomposition one = factor(mat({{1, 1}, {1, 1}}));
  REQUIRE(one.low_rank.rows() == 1);
  REQUIRE(one.low_rank.cols() == 2);
  CHECK(std::abs(one.low_rank(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(one.low_rank(0, 1)) == doctest::Approx(1.0));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Matrix g(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = normal(rng);
  const Matrix r = g.transpose() * g;
  const Decomposition rank3 = factor(0.5 * (r + r.transpose()));
  CHECK(rank3.low_rank.rows() == 3);
  CHECK(rank3.low_rank.cols() == 5);
  CHECK(max_abs(rank3.low_rank.transpose() * rank3.low_rank - r) <= 1e-8);
}

TEST_CASE("low_rank_factor on the worked instance gives beta = (1,1) and g_tilde = 0") {
  const MiqpInstance inst = worked_instance();
  const Decomposition d = worked_decomposition(inst);
  CHECK(max_abs(d.bc_beta.cwiseAbs() - Vector::Ones(2)) < 1e-14);
  CHECK(max_abs(d.bc_g_tilde) < 1e-14);
}

TEST_CASE("with_delta validates the remainder") {
  CHECK_NOTHROW(with_delta(2.0 * Matrix::Identity(2, 2), Vector::Ones(2)));
  CHECK_THROWS_AS(with_delta(2.0 * Matrix::Identity(2, 2), Vector::Constant(2, 3.0)), Error);
  CHECK_THROWS_AS(with_delta(2.0 * Matrix::Identity(2, 2), Vector::Zero(2)), Error);
}

TEST_CASE("decomposition invariants on random diagonally dominant matrices") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial;
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) q(i, j) = q(j, i) = normal(rng);
    for (int i = 0; i < n; ++i) q(i, i) = q.row(i).cwiseAbs().sum() + 0.5 + std::abs(normal(rng));
    for (DiagonalStrategy s : {DiagonalStrategy::DiagDominance, DiagonalStrategy::UniformMinEig,
                               DiagonalStrategy::DominanceShift, DiagonalStrategy::Auto}) {
      CAPTURE(n);
      CAPTURE(to_string(s));
      const Vector g = Vector::Ones(n);
      check_invariants(q, decompose(q, g, s));
    }
  }
}

TEST_CASE("decomposition invariants on generated portfolio instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MiqpInstance inst = generate_portfolio({static_cast<int>(5 + 3 * seed), 4, seed});
    const Decomposition dd = decompose(inst.Q, inst.g, DiagonalStrategy::DiagDominance);
    const Decomposition ds = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
    check_invariants(inst.Q, dd);
    check_invariants(inst.Q, ds);
    // The shift only ever increases the diagonal.
    CHECK((ds.delta - dd.delta).minCoeff() >= -1e-9);
  }
}
