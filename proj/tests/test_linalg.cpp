#include <doctest.h>

#include <random>

#include "miqp/error.hpp"
#include "miqp/linalg.hpp"
#include "miqp/tolerances.hpp"
#include "support.hpp"

using namespace miqp;
using namespace miqp::testing;

namespace {

Matrix random_spd(int n, std::mt19937_64& rng, int rank = -1) {
  std::normal_distribution<double> normal;
  const int r = rank < 0 ? n : rank;
  Matrix g(r, n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  Matrix m = g.transpose() * g;
  if (rank < 0) m += 0.1 * Matrix::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("cholesky_psd on small matrices") {
  SUBCASE("rank-one all-ones") {
    const SymFactor f = cholesky_psd(mat({{1, 1}, {1, 1}}), 1e-8);
    CHECK(f.rank == 1);
    const Matrix l = f.factor();
    REQUIRE(l.cols() == 1);
    CHECK(std::abs(std::abs(l(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(l(1, 0)) - 1.0) < 1e-12);
  }
  SUBCASE("identity") {
    const SymFactor f = cholesky_psd(Matrix::Identity(3, 3), 1e-8);
    CHECK(f.rank == 3);
    CHECK(max_abs(f.factor() * f.factor().transpose() - Matrix::Identity(3, 3)) < 1e-14);
  }
  SUBCASE("[[2,1],[1,2]]") {
    const Matrix m = mat({{2, 1}, {1, 2}});
    const SymFactor f = cholesky_psd(m, 1e-8);
    CHECK(f.pivoted(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(max_abs(f.factor() * f.factor().transpose() - m) <= 1e-10);
  }
  SUBCASE("pivoted factor has exact zeros above the diagonal") {
    std::mt19937_64 rng(3);
    const SymFactor f = cholesky_psd(random_spd(6, rng, 3), 1e-8);
    CHECK(f.rank == 3);
    for (int i = 0; i < f.pivoted.rows(); ++i)
      for (int j = i + 1; j < f.pivoted.cols(); ++j) CHECK(f.pivoted(i, j) == 0.0);
  }
}

TEST_CASE("cholesky_psd errors") {
  CHECK_THROWS_AS(cholesky_psd(mat({{1, 2}, {0, 1}}), 1e-8), Error);
  try {
    cholesky_psd(mat({{1, 0}, {0, -1}}), 1e-8);
    FAIL("expected NotPsd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPsd);
  }
  try {
    cholesky_psd(mat({{1, 0.5}, {0.4, 1}}), 1e-8);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSymmetric);
  }
}

TEST_CASE("cholesky_psd reconstructs random SPD and PSD matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 30;
    const int rank = trial % 3 == 0 ? std::max(1, n / 2) : -1;
    const Matrix m = random_spd(n, rng, rank);
    const SymFactor f = cholesky_psd(m, 1e-10);
    const Matrix l = f.factor();
    CHECK(max_abs(l * l.transpose() - m) <= 1e-8 * (1.0 + inf_norm(m)));
    CHECK(f.rank <= n);
    if (rank > 0) CHECK(f.rank == rank);
  }
}

TEST_CASE("min_eigenvalue_bound brackets the smallest eigenvalue") {
  const double id = min_eigenvalue_bound(Matrix::Identity(2, 2));
  CHECK(id <= 1.0);
  CHECK(id >= 1.0 - 1e-6);
  const double ones = min_eigenvalue_bound(mat({{1, 1}, {1, 1}}));
  CHECK(ones <= 0.0);
  CHECK(ones >= -1e-6 * 2.0);
  CHECK(min_eigenvalue_bound(mat({{2, 1}, {1, 2}})) == doctest::Approx(1.0).epsilon(1e-5));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 15;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    m = 0.5 * (m + m.transpose()).eval();
    const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues()(0);
    const double bound = min_eigenvalue_bound(m);
    CHECK(bound <= lam + 1e-12);
    CHECK(bound >= lam - 1e-6 * inf_norm(m));
    // The shifted matrix must factor.
    Matrix shifted = m;
    shifted.diagonal().array() -= bound;
    CHECK_NOTHROW(cholesky_psd(shifted, 1e-8));
  }
}

TEST_CASE("woodbury_solve examples") {
  CHECK(woodbury_solve(vec({1}), mat({{1}}), vec({4}))(0) == doctest::Approx(2.0));
  const Vector diag = woodbury_solve(vec({2, 2}), Matrix(2, 0), vec({4, 6}));
  CHECK(diag(0) == doctest::Approx(2.0));
  CHECK(diag(1) == doctest::Approx(3.0));
  const Vector beta = woodbury_solve(vec({1, 1}), mat({{1}, {1}}), vec({3, 1}));
  CHECK(beta(0) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(beta(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(woodbury_solve(vec({1, 0}), Matrix(2, 0), vec({1, 1})), Error);
}

TEST_CASE("woodbury_solve agrees with a dense solve") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 50;
    const int p = std::min(m, trial % 11);
    Vector d(m), rhs(m);
    Matrix u(m, p);
    for (int i = 0; i < m; ++i) {
      d(i) = unit(rng);
      rhs(i) = normal(rng);
      for (int j = 0; j < p; ++j) u(i, j) = normal(rng);
    }
    const Vector beta = woodbury_solve(d, u, rhs);
    Matrix full = u * u.transpose();
    full.diagonal() += d;
    const Vector direct = full.ldlt().solve(rhs);
    CHECK((full * beta - rhs).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()));
    CHECK((beta - direct).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + direct.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("spd_solve rejects singular systems") {
  CHECK(spd_solve(mat({{4, 0}, {0, 2}}), vec({4, 2}))(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(spd_solve(mat({{1, 1}, {1, 1}}), vec({1, 1})), Error);
}

TEST_CASE("tolerance record parsing") {
  const Tolerances one = parse_tolerances("1e-9");
  CHECK(one.factorization == 1e-9);
  CHECK(one.kkt == Tolerances{}.kkt);
  const Tolerances many = parse_tolerances("kkt=1e-10,psd=1e-5,cut=1e-6");
  CHECK(many.kkt == 1e-10);
  CHECK(many.psd_slack == 1e-5);
  CHECK(many.cut_violation == 1e-6);
  CHECK_THROWS_AS(parse_tolerances("bogus=1"), Error);
  CHECK_THROWS_AS(parse_tolerances("kkt=abc"), Error);
}
