#pragma once

#include <cstdint>

namespace linerank {

/// Q(x) = P(Z >= x) for a standard normal Z, via erfc.
double normal_upper_tail(double x);

/// Inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Wilson score interval for a binomial proportion at the given two-sided confidence.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence);

}  // namespace linerank
