#include "linerank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"
#include "linerank/simplex.hpp"
#include "linerank/stats.hpp"

namespace linerank {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lines(Eigen::Index columns, const Thresholds& gamma) {
  if (columns != gamma.size())
    throw DomainError("flow samples have " + std::to_string(columns) + " lines but " +
                      std::to_string(gamma.size()) + " thresholds were given");
}

void check_injections(const Eigen::Ref<const Eigen::MatrixXd>& p, const DcModel& model,
                      const Eigen::VectorXd& mu, const Thresholds& gamma) {
  if (p.rows() < 1) throw DomainError("at least one observation is required");
  if (p.cols() != model.stochastic_count() || mu.size() != model.stochastic_count())
    throw DomainError("injection dimension does not match the model");
  check_lines(model.line_count(), gamma);
}

ScoreTable finish(Algorithm alg, Eigen::Index n, Eigen::VectorXd scores, Eigen::VectorXd rates) {
  ScoreTable t;
  t.algorithm = alg;
  t.n = n;
  t.saturated.resize(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index l = 0; l < scores.size(); ++l) t.saturated[static_cast<std::size_t>(l)] = std::isinf(rates(l));
  // Ranking on -rate keeps lines apart whose scores underflow to zero.
  t.ranks = ranks_from_scores(-rates);
  t.scores = std::move(scores);
  t.rate_values = std::move(rates);
  return t;
}

Eigen::VectorXd neg_log(const Eigen::VectorXd& scores) {
  Eigen::VectorXd r(scores.size());
  for (Eigen::Index l = 0; l < scores.size(); ++l) r(l) = scores(l) > 0 ? -std::log(scores(l)) : kInf;
  return r;
}

ScoreTable laplace_at(const DcModel& model, const Eigen::VectorXd& nu, const Eigen::VectorXd& alpha,
                      const Thresholds& gamma, const LaplaceOptions& options) {
  if (!(options.epsilon > 0)) throw DomainError("epsilon must be positive");
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    if (!(alpha(i) >= 0) || std::isinf(alpha(i))) throw DomainError("Laplace scales must be finite and non-negative");
  const Eigen::Index m = model.line_count();
  Eigen::VectorXd h(m), scores(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const Eigen::VectorXd w = model.v_s.row(l).transpose();
    h(l) = weighted_l1_halfspace(w, alpha, gamma[l] - std::abs(nu(l)));
    if (options.verify_with_lp) {
      double lp = nu(l) != 0.0 ? laplace_rate_lp(w, nu(l), gamma[l], alpha, nu(l) > 0 ? 1.0 : -1.0)
                               : std::min(laplace_rate_lp(w, 0.0, gamma[l], alpha, 1.0),
                                          laplace_rate_lp(w, 0.0, gamma[l], alpha, -1.0));
      const bool both_inf = std::isinf(lp) && std::isinf(h(l));
      if (!both_inf && !(std::abs(lp - h(l)) <= options.verify_tolerance * std::max(1.0, std::abs(h(l)))))
        throw NumericError("Laplace rate of line " + std::to_string(l + 1) + ": closed form " + csv::format(h(l)) +
                           " disagrees with the linear program " + csv::format(lp));
    }
    scores(l) = std::exp(-h(l) / options.epsilon);
  }
  return finish(Algorithm::laplace, 0, scores, h);
}

}  // namespace

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::rate_function: return "alg1";
    case Algorithm::counting: return "alg2";
    case Algorithm::gaussian: return "alg3";
    case Algorithm::laplace: return "alg4";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text.substr(0, 3) == "alg") text.remove_prefix(3);
  if (text == "1") return Algorithm::rate_function;
  if (text == "2") return Algorithm::counting;
  if (text == "3") return Algorithm::gaussian;
  if (text == "4") return Algorithm::laplace;
  throw DomainError("unknown algorithm '" + std::string(text) + "'");
}

Thresholds::Thresholds(Eigen::VectorXd gamma) : gamma_(std::move(gamma)) {
  for (Eigen::Index l = 0; l < gamma_.size(); ++l)
    if (!(gamma_(l) > 0)) throw DomainError("threshold of line " + std::to_string(l + 1) + " must be positive");
}

Thresholds Thresholds::from_ratings(const GridCase& grid) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(grid.branch_count()));
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const double rating = grid.branches[l].rating;
    g(static_cast<Eigen::Index>(l)) = rating == 0.0 ? kInf : rating / grid.base_mva;
  }
  return Thresholds(std::move(g));
}

Thresholds Thresholds::from_flow_multiplier(const Eigen::VectorXd& nominal_flows, double multiplier) {
  if (!(multiplier > 0)) throw DomainError("threshold multiplier must be positive");
  return Thresholds(multiplier * nominal_flows.cwiseAbs());
}

std::vector<int> ranks_from_scores(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  const auto m = static_cast<std::size_t>(scores.size());
  if (m == 0) throw DomainError("cannot rank an empty score vector");
  for (Eigen::Index l = 0; l < scores.size(); ++l)
    if (std::isnan(scores(l))) throw DomainError("score of line " + std::to_string(l + 1) + " is NaN");
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) > scores(b); });
  std::vector<int> ranks(m);
  for (std::size_t r = 0; r < m; ++r) ranks[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
  return ranks;
}

std::vector<int> top_k(std::span<const int> ranks, int j) {
  if (j < 1 || j > static_cast<int>(ranks.size()))
    throw DomainError("top-k size " + std::to_string(j) + " outside [1, " + std::to_string(ranks.size()) + "]");
  std::vector<int> out;
  for (std::size_t l = 0; l < ranks.size(); ++l)
    if (ranks[l] <= j) out.push_back(static_cast<int>(l) + 1);
  return out;
}

bool contains_all(std::span<const int> superset, std::span<const int> subset) {
  return std::all_of(subset.begin(), subset.end(), [&](int line) {
    return std::find(superset.begin(), superset.end(), line) != superset.end();
  });
}

std::pair<ScoreTable, RateDiagnostics> alg1_rate_function(const Eigen::Ref<const Eigen::MatrixXd>& flow_samples,
                                                          const Thresholds& gamma) {
  if (flow_samples.rows() < 1) throw DomainError("alg1 needs at least one observation");
  check_lines(flow_samples.cols(), gamma);
  const Eigen::Index m = flow_samples.cols();

  RateDiagnostics diag;
  diag.lambda_star.resize(m);
  diag.j_hat.resize(m);
  diag.saturated.resize(static_cast<std::size_t>(m));
  Eigen::VectorXd scores(m);
  std::vector<double> column(static_cast<std::size_t>(flow_samples.rows()));
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index t = 0; t < flow_samples.rows(); ++t)
      column[static_cast<std::size_t>(t)] = std::abs(flow_samples(t, l));
    const RateEstimate r = estimate_rate(column, gamma[l]);
    diag.lambda_star(l) = r.lambda;
    diag.j_hat(l) = r.rate;
    diag.saturated[static_cast<std::size_t>(l)] = r.saturated;
    scores(l) = std::exp(-r.rate);
  }
  ScoreTable t = finish(Algorithm::rate_function, flow_samples.rows(), std::move(scores), diag.j_hat);
  return {std::move(t), std::move(diag)};
}

RateFunctionRanker::RateFunctionRanker(Thresholds gamma)
    : gamma_(std::move(gamma)), lines_(static_cast<std::size_t>(gamma_.size())) {}

void RateFunctionRanker::append(const Eigen::Ref<const Eigen::MatrixXd>& flow_rows) {
  check_lines(flow_rows.cols(), gamma_);
  std::vector<double> column(static_cast<std::size_t>(flow_rows.rows()));
  for (Eigen::Index l = 0; l < flow_rows.cols(); ++l) {
    for (Eigen::Index t = 0; t < flow_rows.rows(); ++t) column[static_cast<std::size_t>(t)] = std::abs(flow_rows(t, l));
    lines_[static_cast<std::size_t>(l)].append(column);
  }
}

Eigen::Index RateFunctionRanker::size() const {
  return lines_.empty() ? 0 : static_cast<Eigen::Index>(lines_.front().size());
}

std::pair<ScoreTable, RateDiagnostics> RateFunctionRanker::score() {
  if (size() < 1) throw DomainError("alg1 needs at least one observation");
  const Eigen::Index m = gamma_.size();
  RateDiagnostics diag;
  diag.lambda_star.resize(m);
  diag.j_hat.resize(m);
  diag.saturated.resize(static_cast<std::size_t>(m));
  Eigen::VectorXd scores(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const RateEstimate r = lines_[static_cast<std::size_t>(l)].estimate(gamma_[l]);
    diag.lambda_star(l) = r.lambda;
    diag.j_hat(l) = r.rate;
    diag.saturated[static_cast<std::size_t>(l)] = r.saturated;
    scores(l) = std::exp(-r.rate);
  }
  ScoreTable t = finish(Algorithm::rate_function, size(), std::move(scores), diag.j_hat);
  return {std::move(t), std::move(diag)};
}

ScoreTable alg2_counting(const Eigen::Ref<const Eigen::MatrixXd>& flow_samples, const Thresholds& gamma,
                         double confidence) {
  const Eigen::Index n = flow_samples.rows();
  if (n < 1) throw DomainError("alg2 needs at least one observation");
  check_lines(flow_samples.cols(), gamma);
  const Eigen::Index m = flow_samples.cols();
  Eigen::VectorXd scores(m), lower(m), upper(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    std::int64_t hits = 0;
    for (Eigen::Index t = 0; t < n; ++t) hits += std::abs(flow_samples(t, l)) >= gamma[l];
    scores(l) = static_cast<double>(hits) / static_cast<double>(n);
    const Interval w = wilson_interval(hits, n, confidence);
    lower(l) = w.lower;
    upper(l) = w.upper;
  }
  ScoreTable t = finish(Algorithm::counting, n, scores, neg_log(scores));
  t.lower = std::move(lower);
  t.upper = std::move(upper);
  return t;
}

Eigen::VectorXd gaussian_tail_probabilities(const Eigen::VectorXd& nu, const Eigen::VectorXd& sigma,
                                            const Thresholds& gamma) {
  const Eigen::Index m = nu.size();
  Eigen::VectorXd theta(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const double g = gamma[l];
    if (std::isinf(g)) theta(l) = 0.0;
    else if (sigma(l) == 0.0) theta(l) = g <= std::abs(nu(l)) ? 1.0 : 0.0;
    else
      theta(l) = std::min(1.0, normal_upper_tail((g - nu(l)) / sigma(l)) + normal_upper_tail((g + nu(l)) / sigma(l)));
  }
  return theta;
}

ScoreTable gaussian_scores(const DcModel& model, const Eigen::VectorXd& mu, const Eigen::MatrixXd& covariance,
                           const Thresholds& gamma) {
  check_lines(model.line_count(), gamma);
  if (covariance.rows() != model.stochastic_count() || covariance.cols() != model.stochastic_count())
    throw DomainError("covariance dimension does not match the model");
  const Eigen::VectorXd nu = flows(model, mu);
  const Eigen::VectorXd variance = ((model.v_s * covariance).cwiseProduct(model.v_s)).rowwise().sum();
  const Eigen::VectorXd sigma = variance.cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd scores = gaussian_tail_probabilities(nu, sigma, gamma);
  return finish(Algorithm::gaussian, 0, scores, neg_log(scores));
}

ScoreTable alg3_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& injection_samples, const DcModel& model,
                         const Eigen::VectorXd& mu, const Thresholds& gamma) {
  check_injections(injection_samples, model, mu, gamma);
  const Eigen::Index n = injection_samples.rows();
  const Eigen::MatrixXd centred = injection_samples.rowwise() - mu.transpose();
  const Eigen::MatrixXd sigma_hat = (centred.transpose() * centred) / static_cast<double>(n);
  ScoreTable t = gaussian_scores(model, mu, sigma_hat, gamma);
  t.n = n;
  return t;
}

double weighted_l1_halfspace(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                             double c) {
  if (c <= 0) return 0.0;
  const double reach = (alpha.cwiseProduct(w.cwiseAbs())).maxCoeff();
  if (!(reach > 0) || std::isinf(c)) return kInf;
  return c / reach;
}

double laplace_rate_lp(const Eigen::Ref<const Eigen::VectorXd>& v_s_row, double nominal_flow, double gamma,
                       const Eigen::Ref<const Eigen::VectorXd>& alpha, double sign) {
  if (std::isinf(gamma)) return kInf;
  // Coordinates with alpha = 0 cannot move (infinite cost per unit) and are left out.
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    if (alpha(i) > 0) free.push_back(i);
  const auto k = static_cast<Eigen::Index>(free.size());

  // Variables: u (k), v (k) with p - mu = u - v; z (k); surplus s0, s1 (k), s2 (k).
  const Eigen::Index nvars = 5 * k + 1;
  const Eigen::Index u0 = 0, v0 = k, z0 = 2 * k, s0 = 3 * k, s1 = 3 * k + 1, s2 = 4 * k + 1;
  StandardFormLp lp;
  lp.a = Eigen::MatrixXd::Zero(2 * k + 1, nvars);
  lp.b = Eigen::VectorXd::Zero(2 * k + 1);
  lp.c = Eigen::VectorXd::Zero(nvars);

  // sign * (V_s,l p + V_d,l a) >= gamma  <=>  sign * w.(u - v) - s0 = gamma - sign * nu
  for (Eigen::Index q = 0; q < k; ++q) {
    const double w = sign * v_s_row(free[static_cast<std::size_t>(q)]);
    lp.a(0, u0 + q) = w;
    lp.a(0, v0 + q) = -w;
  }
  lp.a(0, s0) = -1.0;
  lp.b(0) = gamma - sign * nominal_flow;

  // z_q >= +(p_q - mu_q) and z_q >= -(p_q - mu_q)
  for (Eigen::Index q = 0; q < k; ++q) {
    lp.a(1 + q, z0 + q) = 1.0;
    lp.a(1 + q, u0 + q) = -1.0;
    lp.a(1 + q, v0 + q) = 1.0;
    lp.a(1 + q, s1 + q) = -1.0;
    lp.a(1 + k + q, z0 + q) = 1.0;
    lp.a(1 + k + q, u0 + q) = 1.0;
    lp.a(1 + k + q, v0 + q) = -1.0;
    lp.a(1 + k + q, s2 + q) = -1.0;
    lp.c(z0 + q) = 1.0 / alpha(free[static_cast<std::size_t>(q)]);
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible) return kInf;
  if (sol.status == LpStatus::unbounded) throw NumericError("Laplace rate LP reported unbounded");
  return std::max(0.0, sol.objective);
}

ScoreTable laplace_scores(const DcModel& model, const Eigen::VectorXd& mu, const Eigen::VectorXd& alpha,
                          const Thresholds& gamma, const LaplaceOptions& options) {
  check_lines(model.line_count(), gamma);
  if (alpha.size() != model.stochastic_count() || mu.size() != model.stochastic_count())
    throw DomainError("Laplace parameter dimension does not match the model");
  return laplace_at(model, flows(model, mu), alpha, gamma, options);
}

ScoreTable alg4_laplace(const Eigen::Ref<const Eigen::MatrixXd>& injection_samples, const DcModel& model,
                        const Eigen::VectorXd& mu, const Thresholds& gamma, const LaplaceOptions& options) {
  check_injections(injection_samples, model, mu, gamma);
  const Eigen::Index n = injection_samples.rows();
  const Eigen::VectorXd alpha =
      (injection_samples.rowwise() - mu.transpose()).cwiseAbs().colwise().sum().transpose() / static_cast<double>(n);
  ScoreTable t = laplace_at(model, flows(model, mu), alpha, gamma, options);
  t.n = n;
  return t;
}

void write_score_table_csv(const ScoreTable& table, std::ostream& out) {
  out << "line,score,rate_value,rank,saturated,algorithm,n\n";
  for (Eigen::Index l = 0; l < table.scores.size(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    out << l + 1 << ',' << csv::format(table.scores(l)) << ',' << csv::format(table.rate_values(l)) << ','
        << table.ranks[i] << ',' << int(table.saturated[i]) << ',' << to_string(table.algorithm) << ',' << table.n
        << '\n';
  }
}

}  // namespace linerank
