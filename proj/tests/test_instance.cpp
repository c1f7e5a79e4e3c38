#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <cstring>
#include <regex>
#include <sstream>

#include "miqp/decompose.hpp"
#include "miqp/error.hpp"
#include "miqp/instance.hpp"
#include "miqp/oracle.hpp"
#include "support.hpp"

using namespace miqp;
using namespace miqp::testing;

namespace {

ErrorCode parse_code(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string worked_text() {
  std::ifstream in(fixture("worked_n2.miqp"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sample_portfolio layout and ranges") {
  const MiqpInstance inst = sample_portfolio({5, 2, 7});
  CHECK(inst.n == 5);
  CHECK(inst.m1() == 3);
  CHECK(inst.m2() == 10);
  REQUIRE(inst.k.has_value());
  CHECK(*inst.k == 2);
  for (int i = 0; i < 5; ++i) {
    CHECK(inst.Q(i, i) >= 50.0);
    CHECK(inst.Q(i, i) <= 100.0);
    CHECK(inst.Q(i, i) == std::round(inst.Q(i, i)));
  }
  CHECK(max_abs(inst.g) == 0.0);
  CHECK(max_abs(inst.h) == 0.0);
}

TEST_CASE("generated instances satisfy the distribution invariants") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 4 + static_cast<int>(seed);
    const std::optional<int> k = seed % 3 == 0 ? std::nullopt : std::optional<int>(3 + seed % 4);
    const MiqpInstance inst = generate_portfolio({n, k, seed});
    CAPTURE(inst.name);
    CHECK_NOTHROW(validate(inst));
    CHECK(inst.k == k);
    const Matrix a = Matrix(inst.A);
    const Matrix c = Matrix(inst.C);
    const Matrix d = Matrix(inst.D);
    // Budget as two inequalities, then the return row.
    CHECK(max_abs(a.row(0) - Matrix::Ones(1, n)) == 0.0);
    CHECK(max_abs(a.row(1) + Matrix::Ones(1, n)) == 0.0);
    CHECK(inst.b(0) == 1.0);
    CHECK(inst.b(1) == -1.0);
    const double rho = -inst.b(2);
    CHECK(rho >= 0.002);
    CHECK(rho <= 0.01);
    for (int i = 0; i < n; ++i) {
      const double mu = -a(2, i);
      CHECK(mu >= 0.002);
      CHECK(mu <= 0.01);
      CHECK(inst.Q(i, i) >= 10.0 * n);
      CHECK(inst.Q(i, i) <= 20.0 * n);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(inst.Q(i, j) == inst.Q(j, i));
        CHECK(inst.Q(i, j) >= 1.0);
        CHECK(inst.Q(i, j) <= 10.0);
      }
      // Rows 2i and 2i+1: y_i - u_i x_i <= 0 and -y_i + alpha_i x_i <= 0.
      const double u = d(2 * i, i);
      const double alpha = -d(2 * i + 1, i);
      CHECK(c(2 * i, i) == 1.0);
      CHECK(c(2 * i + 1, i) == -1.0);
      CHECK(u >= 0.375);
      CHECK(u <= 0.425);
      CHECK(alpha >= 0.075);
      CHECK(alpha <= 0.125);
    }
    // Diagonal dominance makes the dominance split succeed with delta > 0.
    const Decomposition dd = extract_diagonal(inst.Q, DiagonalStrategy::DiagDominance);
    CHECK(dd.delta.minCoeff() > 0.0);
    CHECK(dd.delta.minCoeff() > 10.0 * n - 10.0 * (n - 1) - 1e-12);
    CHECK(portfolio_feasible(inst));
  }
}

TEST_CASE("without k the minimum-investment rows cap the support at 13") {
  // alpha_i >= 0.075 and sum y = 1 leave room for at most floor(1/0.075) assets.
  const MiqpInstance inst = generate_portfolio({20, std::nullopt, 4});
  CHECK_FALSE(inst.k.has_value());
  const Matrix d = Matrix(inst.D);
  double min_alpha = 1.0;
  for (int i = 0; i < inst.n; ++i) min_alpha = std::min(min_alpha, -d(2 * i + 1, i));
  CHECK(static_cast<int>(std::floor(1.0 / min_alpha)) <= 13);
}

TEST_CASE("generation is deterministic and frozen") {
  const MiqpInstance a = generate_portfolio({10, 4, 1});
  const MiqpInstance b = generate_portfolio({10, 4, 1});
  CHECK(a == b);
  CHECK(format_instance(a) == format_instance(b));
  // Byte-identical to the fixture written when the generator was frozen.
  CHECK(a == read_instance(fixture("portfolio_n10_k4_s1.miqp")));
  CHECK(generate_portfolio({9, std::nullopt, 2}) ==
        read_instance(fixture("portfolio_n9_knone_s2.miqp")));
  CHECK(a.generator == kPortfolioGenerator);
  CHECK_FALSE(generate_portfolio({10, 4, 2}) == a);
}

TEST_CASE("generate rejects bad specs") {
  const auto code = [](const PortfolioSpec& s) {
    try {
      generate_portfolio(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code({1, std::nullopt, 1}) == ErrorCode::BadSpec);
  CHECK(code({5, 6, 1}) == ErrorCode::BadSpec);
  CHECK(code({5, 0, 1}) == ErrorCode::BadSpec);
  // Two assets cannot carry the whole budget under u <= 0.425.
  CHECK(code({10, 2, 1}) == ErrorCode::BadSpec);
}

TEST_CASE("instance files round-trip bit exactly") {
  const MiqpInstance worked = parse_instance(worked_text());
  CHECK(worked.n == 2);
  CHECK(worked.k == std::optional<int>(2));
  CHECK(max_abs(worked.Q - 2.0 * Matrix::Identity(2, 2)) == 0.0);
  CHECK(parse_instance(format_instance(worked)) == worked);

  const auto dir = std::filesystem::temp_directory_path() / "miqp_instance_test";
  std::filesystem::create_directories(dir);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MiqpInstance inst = generate_portfolio({12, 5, seed});
    const auto path = dir / (inst.name + ".miqp");
    write_instance(inst, path);
    const MiqpInstance back = read_instance(path);
    CHECK(back == inst);
    // Bitwise equality of every stored double.
    CHECK(std::memcmp(back.Q.data(), inst.Q.data(), sizeof(double) * 144) == 0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("instance file errors") {
  std::string text = worked_text();
  SUBCASE("asymmetric Q names the pair") {
    const std::string bad = std::regex_replace(text, std::regex("2 0\n0 2"), "2 0.5\n0 2");
    try {
      parse_instance(bad);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("Q(0,1)") != std::string::npos);
    }
  }
  SUBCASE("missing k means no cardinality bound") {
    const std::string no_k = std::regex_replace(text, std::regex("\\[k\\]\n2\n"), "");
    CHECK_FALSE(parse_instance(no_k).k.has_value());
  }
  SUBCASE("malformed input") {
    CHECK(parse_code(std::regex_replace(text, std::regex("-2 -2"), "-2 x")) == ErrorCode::ParseError);
    CHECK(parse_code(std::regex_replace(text, std::regex("n 2"), "n 3")) == ErrorCode::ParseError);
    CHECK(parse_code(std::regex_replace(text, std::regex("\\[k\\]\n2"), "[k]\n5")) ==
          ErrorCode::ParseError);
    CHECK(parse_code("[bogus]\n") == ErrorCode::ParseError);
  }
  CHECK_THROWS_AS(read_instance("/nonexistent/file.miqp"), Error);
}

TEST_CASE("validate catches structural problems") {
  MiqpInstance inst = worked_instance();
  CHECK_NOTHROW(validate(inst));
  inst.Q(0, 0) = -1.0;
  try {
    validate(inst);
    FAIL("expected NotPd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPd);
  }
  inst = worked_instance();
  inst.g = Vector::Zero(3);
  CHECK_THROWS_AS(validate(inst), Error);
}

TEST_CASE("objective evaluates y^T Q y + g^T y + h^T x") {
  MiqpInstance inst = worked_instance();
  inst.h = vec({0.5, 0.25});
  CHECK(inst.objective(vec({1, 0}), vec({0.5, 0})) == doctest::Approx(2 * 0.25 - 1.0 + 0.5));
}
