#include <doctest.h>

#include <cmath>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"
#include "linerank/stats.hpp"

using namespace linerank;

TEST_CASE("normal tail and quantile") {
  CHECK(normal_upper_tail(0.0) == doctest::Approx(0.5));
  CHECK(normal_upper_tail(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(normal_upper_tail(10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-10));
  for (double p : {1e-10, 0.001, 0.025, 0.3, 0.5, 0.9, 0.995})
    CHECK(normal_upper_tail(-normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
}

TEST_CASE("Wilson interval") {
  // 0 of 10 at 95%: upper = z^2 / (n + z^2).
  const double z2 = std::pow(1.959963984540054, 2);
  const Interval a = wilson_interval(0, 10, 0.95);
  CHECK(a.lower == doctest::Approx(0.0));
  CHECK(a.upper == doctest::Approx(z2 / (10 + z2)));
  const Interval b = wilson_interval(50, 100, 0.95);
  CHECK(b.lower == doctest::Approx(0.40383153).epsilon(1e-7));
  CHECK(b.upper == doctest::Approx(0.59616847).epsilon(1e-7));
  CHECK(b.contains(0.5));
  CHECK_FALSE(b.contains(0.7));
  CHECK_THROWS_AS(wilson_interval(5, 0, 0.95), DomainError);
  CHECK_THROWS_AS(wilson_interval(11, 10, 0.95), DomainError);
}

TEST_CASE("csv number formatting") {
  CHECK(csv::format(0.1) == "0.1");
  CHECK(csv::format(2.0) == "2");
  CHECK(csv::format(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(csv::format(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv::parse_double(" 3.5") == 3.5);
  CHECK(std::isinf(csv::parse_double("inf")));
  CHECK_THROWS_AS(csv::parse_double("abc"), ParseError);
  CHECK(csv::split("a,,b").size() == 3);
}
