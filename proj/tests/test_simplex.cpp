#include <doctest.h>

#include "linerank/errors.hpp"
#include "linerank/simplex.hpp"

using namespace linerank;

TEST_CASE("textbook program") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36.
  StandardFormLp lp;
  lp.a.resize(3, 5);
  lp.a << 1, 0, 1, 0, 0, 0, 2, 0, 1, 0, 3, 2, 0, 0, 1;
  lp.b = Eigen::Vector3d(4, 12, 18);
  lp.c.resize(5);
  lp.c << -3, -5, 0, 0, 0;
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(-36));
  CHECK(s.x(0) == doctest::Approx(2));
  CHECK(s.x(1) == doctest::Approx(6));
}

TEST_CASE("equality constraints with negative right-hand side") {
  // min x + y s.t. x - y = -2 -> x = 0, y = 2.
  StandardFormLp lp{Eigen::MatrixXd(1, 2), Eigen::VectorXd::Constant(1, -2.0), Eigen::Vector2d(1, 1)};
  lp.a << 1, -1;
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(2));
}

TEST_CASE("infeasible and unbounded programs") {
  StandardFormLp infeasible{Eigen::MatrixXd(2, 1), Eigen::Vector2d(1, 2), Eigen::VectorXd::Ones(1)};
  infeasible.a << 1, 1;
  CHECK(solve_lp(infeasible).status == LpStatus::infeasible);

  StandardFormLp unbounded{Eigen::MatrixXd(1, 2), Eigen::VectorXd::Ones(1), Eigen::Vector2d(-1, 0)};
  unbounded.a << 1, -1;
  CHECK(solve_lp(unbounded).status == LpStatus::unbounded);
}

TEST_CASE("redundant rows") {
  StandardFormLp lp{Eigen::MatrixXd(2, 2), Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)};
  lp.a << 1, 1, 2, 2;
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(1));
}

TEST_CASE("dimension mismatch") {
  StandardFormLp lp{Eigen::MatrixXd(2, 2), Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2)};
  CHECK_THROWS_AS(solve_lp(lp), DomainError);
}
