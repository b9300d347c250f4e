#include "linerank/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linerank/errors.hpp"

namespace linerank {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-10;
constexpr int kMaxIter = 200;

// Moments of the exponentially tilted empirical distribution, centred at the sample max.
struct Tilted {
  long double s0 = 0, s1 = 0, s2 = 0;  // sum e, sum y e, sum y^2 e with y = x - max

  double derivative(double gamma, double max) const {
    return gamma - (max + static_cast<double>(s1 / s0));
  }
  double curvature() const {
    const long double m1 = s1 / s0;
    return -static_cast<double>(std::max(0.0L, s2 / s0 - m1 * m1));
  }
};

Tilted tilt(std::span<const double> x, double max, double lambda) {
  Tilted t;
  for (double v : x) {
    const double y = v - max;
    const long double e = std::exp(lambda * y);
    t.s0 += e;
    t.s1 += y * e;
    t.s2 += y * y * e;
  }
  return t;
}

// g(lambda) = lambda (gamma - max) - log((1/n) sum exp(lambda (x - max))).
double objective(std::span<const double> x, const SampleSummary& s, double gamma, double lambda) {
  const Tilted t = tilt(x, s.max, lambda);
  return lambda * (gamma - s.max) -
         static_cast<double>(std::log(t.s0 / static_cast<long double>(s.count)));
}

}  // namespace

SampleSummary summarize(std::span<const double> abs_samples) {
  SampleSummary s;
  s.count = abs_samples.size();
  if (s.count == 0) return s;
  long double sum = 0;
  s.max = -kInf;
  for (double v : abs_samples) {
    if (!(v >= 0)) throw DomainError("rate estimation needs non-negative samples");
    sum += v;
    if (v > s.max) {
      s.max = v;
      s.at_max = 1;
    } else if (v == s.max) {
      ++s.at_max;
    }
  }
  s.mean = static_cast<double>(sum / static_cast<long double>(s.count));
  return s;
}

double empirical_cgf(std::span<const double> abs_samples, double lambda) {
  if (abs_samples.empty()) throw DomainError("empty sample");
  const double max = lambda >= 0 ? *std::max_element(abs_samples.begin(), abs_samples.end())
                                 : *std::min_element(abs_samples.begin(), abs_samples.end());
  long double s0 = 0;
  for (double v : abs_samples) s0 += std::exp(lambda * (v - max));
  return lambda * max + static_cast<double>(std::log(s0 / static_cast<long double>(abs_samples.size())));
}

RateEstimate estimate_rate(std::span<const double> abs_samples, double gamma, double lambda_start) {
  if (abs_samples.empty()) throw DomainError("rate estimation needs at least one sample");
  return estimate_rate(abs_samples, summarize(abs_samples), gamma, lambda_start);
}

RateEstimate estimate_rate(std::span<const double> x, const SampleSummary& s, double gamma,
                           double lambda_start) {
  if (s.count == 0 || x.size() != s.count) throw DomainError("rate estimation needs at least one sample");
  if (std::isnan(gamma)) throw DomainError("threshold is NaN");

  if (gamma <= s.mean) return {0.0, 0.0, false, 0};
  if (gamma > s.max) return {kInf, kInf, true, 0};
  if (gamma == s.max) {
    // Supremum approached as lambda -> inf: only the samples at the maximum survive the tilt.
    return {kInf, std::log(static_cast<double>(s.count) / static_cast<double>(s.at_max)), false, 0};
  }

  // mean < gamma < max: the derivative falls from gamma - mean > 0 to gamma - max < 0, so a
  // finite root exists.
  int iterations = 0;
  double lo = 0.0, hi = kInf;
  double lambda = lambda_start > 0 && std::isfinite(lambda_start) ? lambda_start : 1.0 / (s.max - s.mean);
  while (true) {
    ++iterations;
    const double gp = tilt(x, s.max, lambda).derivative(gamma, s.max);
    if (gp < 0) {
      hi = lambda;
      break;
    }
    lo = lambda;
    if (gp == 0) {
      hi = lambda;
      break;
    }
    lambda *= 2.0;
    if (iterations > 2000) throw NumericError("could not bracket the rate-function optimiser");
  }
  if (lo == hi) return {lambda, std::max(0.0, objective(x, s, gamma, lambda)), false, iterations};

  if (!(lambda_start > lo && lambda_start < hi)) lambda = 0.5 * (lo + hi);
  else lambda = lambda_start;

  for (int it = 0; it < kMaxIter; ++it) {
    ++iterations;
    const Tilted t = tilt(x, s.max, lambda);
    const double gp = t.derivative(gamma, s.max);
    if (gp == 0) break;
    (gp > 0 ? lo : hi) = lambda;

    const double gpp = t.curvature();
    double next = gpp < 0 ? lambda - gp / gpp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool converged = std::abs(next - lambda) <= kRelTol * next || (hi - lo) <= kRelTol * hi;
    lambda = next;
    if (converged) break;
  }
  return {lambda, std::max(0.0, objective(x, s, gamma, lambda)), false, iterations};
}

void EmpiricalRateFunction::append(std::span<const double> abs_samples) {
  for (double v : abs_samples) {
    if (!(v >= 0)) throw DomainError("rate estimation needs non-negative samples");
    if (summary_.count == 0 || v > summary_.max) {
      summary_.max = v;
      summary_.at_max = 1;
    } else if (v == summary_.max) {
      ++summary_.at_max;
    }
    sum_ += v;
    ++summary_.count;
    samples_.push_back(v);
  }
  if (summary_.count > 0) summary_.mean = static_cast<double>(sum_ / static_cast<long double>(summary_.count));
}

RateEstimate EmpiricalRateFunction::estimate(double gamma) {
  if (samples_.empty()) throw DomainError("rate estimation needs at least one sample");
  RateEstimate r = estimate_rate(samples_, summary_, gamma, last_lambda_);
  if (std::isfinite(r.lambda) && r.lambda > 0) last_lambda_ = r.lambda;
  return r;
}

}  // namespace linerank
