#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace linerank {

/// Result of maximising g(lambda) = lambda * gamma - log((1/n) sum_t exp(lambda x_t)) over
/// lambda >= 0. `rate` is +inf exactly when gamma exceeds the sample maximum (`saturated`).
struct RateEstimate {
  double lambda = 0.0;
  double rate = 0.0;
  bool saturated = false;
  int iterations = 0;
};

/// Summary statistics the estimator needs besides the raw samples.
struct SampleSummary {
  std::size_t count = 0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t at_max = 0;  // samples equal to max
};

SampleSummary summarize(std::span<const double> abs_samples);

/// log((1/n) sum_t exp(lambda x_t)), evaluated with max subtraction.
double empirical_cgf(std::span<const double> abs_samples, double lambda);

/// Empirical rate function at gamma for non-negative samples (absolute flows).
///
/// The objective is concave; its derivative gamma - E_lambda[x] (exponentially tilted mean) is
/// driven to zero by a bracketed Newton iteration with bisection fallback, relative tolerance
/// 1e-10 on lambda. `lambda_start` only seeds the iteration. Throws DomainError on an empty or
/// negative sample.
RateEstimate estimate_rate(std::span<const double> abs_samples, double gamma, double lambda_start = 0.0);
RateEstimate estimate_rate(std::span<const double> abs_samples, const SampleSummary& summary, double gamma,
                           double lambda_start = 0.0);

/// Online form of estimate_rate: observations are appended and the previous optimiser is
/// reused as the starting point, so re-solving after a small append takes few iterations.
class EmpiricalRateFunction {
public:
  void append(std::span<const double> abs_samples);
  void append(double abs_sample) { append(std::span<const double>(&abs_sample, 1)); }

  RateEstimate estimate(double gamma);

  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const double> samples() const noexcept { return samples_; }

private:
  std::vector<double> samples_;
  SampleSummary summary_;
  long double sum_ = 0.0L;
  double last_lambda_ = 0.0;
};

}  // namespace linerank
