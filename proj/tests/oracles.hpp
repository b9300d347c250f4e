#pragma once

// Reference implementations used only by the tests. Each one takes a different route from the
// library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Breadth-first search from node 0.
inline bool bfs_connected(std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (nodes == 0) return false;
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(nodes, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        q.push(w);
      }
  }
  return count == nodes;
}

// L^+ = P X P with X the inverse of L grounded at node 0 (zero row/column for node 0) and
// P = I - 11^T / b the projector onto the complement of the constant vector.
inline Eigen::MatrixXd grounded_pinv(const Eigen::MatrixXd& l) {
  const Eigen::Index b = l.rows();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(b, b);
  x.bottomRightCorner(b - 1, b - 1) = l.bottomRightCorner(b - 1, b - 1).fullPivLu().inverse();
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(b, b) - Eigen::MatrixXd::Constant(b, b, 1.0 / double(b));
  return p * x * p;
}

// g(lambda) = lambda gamma - log((1/n) sum exp(lambda x)), straightforward long double sums.
inline double rate_objective(const std::vector<double>& x, double gamma, double lambda) {
  long double s = 0;
  for (double v : x) s += std::exp(static_cast<long double>(lambda) * v);
  return lambda * gamma - static_cast<double>(std::log(s / static_cast<long double>(x.size())));
}

// sup over lambda >= 0 of rate_objective by grid search: a coarse scan over an expanding range,
// then a scan with the given step around the coarse maximiser.
inline std::pair<double, double> rate_grid_search(const std::vector<double>& x, double gamma, double step = 1e-5) {
  double hi = 1e-3;
  while (rate_objective(x, gamma, 2 * hi) > rate_objective(x, gamma, hi) && hi < 1e6) hi *= 2;
  hi *= 2;
  const int coarse = 2000;
  const double h = hi / coarse;
  double best_l = 0, best = rate_objective(x, gamma, 0);
  for (int i = 1; i <= coarse; ++i) {
    const double v = rate_objective(x, gamma, i * h);
    if (v > best) {
      best = v;
      best_l = i * h;
    }
  }
  const double a = std::max(0.0, best_l - 2 * h), b = best_l + 2 * h;
  const auto steps = static_cast<long>((b - a) / step);
  for (long i = 0; i <= steps; ++i) {
    const double l = a + static_cast<double>(i) * step;
    const double v = rate_objective(x, gamma, l);
    if (v > best) {
      best = v;
      best_l = l;
    }
  }
  return {best_l, best};
}

// P(|N(nu, sigma^2)| >= gamma) by composite Simpson integration of the density.
inline double normal_tail_quadrature(double nu, double sigma, double gamma) {
  auto density = [&](double x) {
    const double z = (x - nu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
  };
  auto simpson = [&](double a, double b) {
    if (b <= a) return 0.0;
    const int n = 20000;
    const double h = (b - a) / n;
    double s = density(a) + density(b);
    for (int i = 1; i < n; ++i) s += density(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
  };
  const double reach = std::abs(nu) + 40 * sigma;
  return simpson(gamma, std::max(gamma, reach)) + simpson(-std::max(gamma, reach), -gamma);
}

// min sum |q_i| / alpha_i over w.q >= c through its dual: max c y over 0 <= y, |w_i| y <= 1 / alpha_i.
inline double weighted_l1_dual(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha, double c) {
  if (c <= 0) return 0.0;
  double y = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (alpha(i) > 0 && w(i) != 0) y = std::min(y, 1.0 / (alpha(i) * std::abs(w(i))));
  return c * y;
}

// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double laplace_cdf(double x) { return x < 0 ? 0.5 * std::exp(x) : 1 - 0.5 * std::exp(-x); }

}  // namespace oracle
