#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace imagestar;

namespace {

LinearConstraints rows(std::initializer_list<std::initializer_list<double>> r) {
  const auto m = static_cast<Eigen::Index>(r.size());
  const auto n = static_cast<Eigen::Index>(r.begin()->size() - 1);
  LinearConstraints c(Eigen::MatrixXd(m, n), Eigen::VectorXd(m));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) {
      if (j < n)
        c.C(i, j) = v;
      else
        c.d(i) = v;
      ++j;
    }
    ++i;
  }
  return c;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("textbook maximization") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18, x,y >= 0  ->  36 at (2, 6)
  const auto cons = rows({{1, 0, 4}, {0, 2, 12}, {3, 2, 18}, {-1, 0, 0}, {0, -1, 0}});
  const auto r = maximize(vec({3, 5}), cons);
  REQUIRE(r.optimal());
  CHECK(r.value == doctest::Approx(36.0));
  CHECK(r.witness(0) == doctest::Approx(2.0));
  CHECK(r.witness(1) == doctest::Approx(6.0));
}

TEST_CASE("negative right-hand sides need phase one") {
  // x >= 1, y >= 2, x + y <= 10; min x + y = 3
  const auto cons = rows({{-1, 0, -1}, {0, -1, -2}, {1, 1, 10}});
  const auto r = minimize(vec({1, 1}), cons);
  REQUIRE(r.optimal());
  CHECK(r.value == doctest::Approx(3.0));
  CHECK(cons.satisfied_by(r.witness, 1e-9));
}

TEST_CASE("free variables take negative values") {
  const auto cons = LinearConstraints::box(vec({-5, -3}), vec({-1, 2}));
  const auto r = minimize(vec({1, 1}), cons);
  REQUIRE(r.optimal());
  CHECK(r.value == doctest::Approx(-8.0));
}

TEST_CASE("infeasible and unbounded statuses") {
  CHECK(minimize(vec({1}), rows({{1, 0}, {-1, -1}})).status == LPStatus::Infeasible);
  CHECK_FALSE(is_feasible(rows({{1, 1, 1}, {-1, -1, -2}})));
  CHECK(minimize(vec({-1, 0}), rows({{0, 1, 1}, {-1, 0, 0}})).status == LPStatus::Unbounded);
  CHECK(maximize(vec({1}), rows({{-1, 0}})).status == LPStatus::Unbounded);
}

TEST_CASE("equality written as two rows") {
  // x + y = 1, x - y = 0.5
  const auto cons = rows({{1, 1, 1}, {-1, -1, -1}, {1, -1, 0.5}, {-1, 1, -0.5}});
  const auto r = find_feasible_point(cons);
  REQUIRE(r.optimal());
  CHECK(r.witness(0) == doctest::Approx(0.75));
  CHECK(r.witness(1) == doctest::Approx(0.25));
}

TEST_CASE("Beale's cycling example terminates under Bland's rule") {
  const auto cons = rows({{0.25, -8, -1, 9, 0},
                          {0.5, -12, -0.5, 3, 0},
                          {0, 0, 1, 0, 1},
                          {-1, 0, 0, 0, 0},
                          {0, -1, 0, 0, 0},
                          {0, 0, -1, 0, 0},
                          {0, 0, 0, -1, 0}});
  const auto r = minimize(vec({-0.75, 20, -0.5, 6}), cons);
  REQUIRE(r.optimal());
  CHECK(r.value == doctest::Approx(-1.25));
}

TEST_CASE("zero rows and empty constraint sets") {
  const auto r = minimize(vec({1}), rows({{0, 1}, {-1, 0}}));
  REQUIRE(r.optimal());
  CHECK(r.value == doctest::Approx(0.0));
  CHECK_FALSE(is_feasible(rows({{0, -1}})));
  LinearConstraints none(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  CHECK(minimize(vec({1, 0}), none).status == LPStatus::Unbounded);
  CHECK(minimize(vec({0, 0}), none).optimal());
}

TEST_CASE("dimension errors") {
  CHECK_THROWS_AS(minimize(vec({1, 2}), rows({{1, 0}})), DimensionMismatch);
  CHECK_THROWS_AS(LinearConstraints(Eigen::MatrixXd(2, 1), Eigen::VectorXd(3)), DimensionMismatch);
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(LinearConstraints(bad, Eigen::VectorXd::Zero(1)), DimensionMismatch);
}

TEST_CASE("maximize is the negated minimization of the negated objective") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index n = static_cast<Eigen::Index>(oracle::pick(rng, 1, 3));
    auto cons = LinearConstraints::box(Eigen::VectorXd::Constant(n, -2), Eigen::VectorXd::Constant(n, 3));
    Eigen::VectorXd obj(n);
    for (Eigen::Index i = 0; i < n; ++i) obj(i) = oracle::uniform(rng, -1, 1);
    const auto mx = maximize(obj, cons);
    const auto mn = minimize(-obj, cons);
    REQUIRE(mx.optimal());
    CHECK(mx.value == doctest::Approx(-mn.value).epsilon(1e-9));
    CHECK(obj.dot(mx.witness) == doctest::Approx(mx.value));
  }
}

TEST_CASE("random bounded LPs agree with vertex enumeration") {
  std::mt19937_64 rng(11);
  int infeasible = 0;
  for (int t = 0; t < 150; ++t) {
    const auto n = static_cast<Eigen::Index>(oracle::pick(rng, 1, 4));
    Eigen::VectorXd lb(n), ub(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      lb(i) = oracle::uniform(rng, -3, 1);
      ub(i) = lb(i) + oracle::uniform(rng, 0.1, 4);
    }
    auto cons = LinearConstraints::box(lb, ub);
    const Eigen::VectorXd mid = (lb + ub) / 2;
    const std::size_t extra = oracle::pick(rng, 0, 12 - 2 * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < extra; ++k) {
      Eigen::RowVectorXd row(n);
      for (Eigen::Index i = 0; i < n; ++i) row(i) = oracle::uniform(rng, -1, 1);
      // offsets around an interior point keep most instances feasible
      cons.append_row(row, row.dot(mid) + oracle::uniform(rng, -0.5, 1.5));
    }
    Eigen::VectorXd obj(n);
    for (Eigen::Index i = 0; i < n; ++i) obj(i) = oracle::uniform(rng, -2, 2);

    const auto expected = oracle::vertex_minimum(obj, cons.C, cons.d);
    const auto got = minimize(obj, cons);
    if (!expected) {
      ++infeasible;
      CHECK(got.status == LPStatus::Infeasible);
      continue;
    }
    REQUIRE(got.optimal());
    CHECK(std::abs(got.value - *expected) <= 1e-6);
    CHECK(cons.satisfied_by(got.witness, 1e-7));
  }
  CHECK(infeasible > 0);
}
