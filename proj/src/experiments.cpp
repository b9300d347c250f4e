#include "linerank/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"
#include "linerank/stats.hpp"

namespace linerank {
namespace {

constexpr Eigen::Index kTruthChunk = 100'000;

// Runs task(r) for r in [0, count) on up to `threads` workers. Results are written by the
// task into per-replication slots, so the outcome does not depend on scheduling.
template <typename Task>
void parallel_replications(int count, unsigned threads, Task task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int r = next++; r < count; r = next++) {
      try {
        task(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

void check_setup(const ExperimentSetup& setup) {
  if (setup.algorithms.empty()) throw DomainError("no algorithm selected");
  if (setup.replications < 1) throw DomainError("replications must be at least 1");
  if (mean_of(setup.spec).size() != setup.model.stochastic_count())
    throw DomainError("injection model dimension does not match the network");
  if (setup.gamma.size() != setup.model.line_count())
    throw DomainError("threshold count does not match the network");
}

void check_truth(const ExperimentSetup& setup, const GroundTruth& truth) {
  if (truth.true_ranks.size() != static_cast<std::size_t>(setup.model.line_count()))
    throw DomainError("ground truth does not match the network");
}

// Scores of one algorithm on the first n rows. Alg. 1 goes through the incremental ranker so
// consecutive n of a nested grid reuse the previous optimiser state.
class PrefixScorer {
public:
  PrefixScorer(const ExperimentSetup& setup, const Eigen::MatrixXd& injections, const Eigen::MatrixXd& flows)
      : setup_(setup), injections_(injections), flows_(flows), ranker_(setup.gamma) {}

  ScoreTable score(Algorithm alg, Eigen::Index n) {
    const Eigen::VectorXd& mu = mean_of(setup_.spec);
    switch (alg) {
      case Algorithm::rate_function:
        if (n < ranker_.size()) ranker_ = RateFunctionRanker(setup_.gamma);
        if (n > ranker_.size()) ranker_.append(flows_.middleRows(ranker_.size(), n - ranker_.size()));
        return ranker_.score().first;
      case Algorithm::counting:
        return alg2_counting(flows_.topRows(n), setup_.gamma);
      case Algorithm::gaussian:
        return alg3_gaussian(injections_.topRows(n), setup_.model, mu, setup_.gamma);
      case Algorithm::laplace:
        return alg4_laplace(injections_.topRows(n), setup_.model, mu, setup_.gamma, setup_.laplace);
    }
    throw DomainError("unknown algorithm");
  }

private:
  const ExperimentSetup& setup_;
  const Eigen::MatrixXd& injections_;
  const Eigen::MatrixXd& flows_;
  RateFunctionRanker ranker_;
};

}  // namespace

InjectionModel case_study_model(const DcModel& model, Distribution kind, const CaseStudyParameters& params) {
  const Eigen::VectorXd mu = model.nominal_stochastic;
  const Eigen::VectorXd mu_mw = mu * model.base_mva;
  const CovarianceBuild cov = case_study_covariance(mu_mw, params.variance_factor, params.offdiag_variance,
                                                    params.covariance_seed, model.base_mva);
  if (kind == Distribution::gaussian) return GaussianSpec{mu, cov.covariance};
  return laplace_with_variances(mu, cov.covariance.diagonal(), params.epsilon);
}

std::string_view to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::analytic_gaussian: return "analytic_gaussian";
    case TruthKind::laplace_ldp_perfect: return "laplace_ldp_perfect";
    case TruthKind::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

GroundTruth ground_truth(const DcModel& model, const InjectionModel& spec, const Thresholds& gamma,
                         const TruthSource& source) {
  if (mean_of(spec).size() != model.stochastic_count())
    throw DomainError("injection model dimension does not match the network");
  GroundTruth truth;
  truth.source = source;
  switch (source.kind) {
    case TruthKind::analytic_gaussian: {
      const auto* g = std::get_if<GaussianSpec>(&spec);
      if (!g) throw DomainError("analytic Gaussian ground truth requires a Gaussian injection model");
      truth.theta = gaussian_scores(model, g->mean, g->covariance, gamma).scores;
      break;
    }
    case TruthKind::laplace_ldp_perfect: {
      const auto* l = std::get_if<LaplaceSpec>(&spec);
      if (!l) throw DomainError("Laplace large-deviations ground truth requires a Laplace injection model");
      // Alg. 4 estimates the mean absolute deviation, which is epsilon * scale.
      truth.theta = laplace_scores(model, l->mean, l->epsilon * l->scale, gamma).scores;
      break;
    }
    case TruthKind::monte_carlo: {
      if (source.n_mc < 1) throw DomainError("Monte Carlo ground truth needs n_mc >= 1");
      const Eigen::Index m = model.line_count();
      std::vector<std::int64_t> hits(static_cast<std::size_t>(m), 0);
      const rng::StreamKey key{source.seed, kTruthStream, 0};
      for (Eigen::Index first = 0; first < source.n_mc; first += kTruthChunk) {
        const Eigen::Index count = std::min(kTruthChunk, source.n_mc - first);
        const Eigen::MatrixXd f = flow_samples(model, sample_rows(spec, static_cast<std::uint64_t>(first), count, key));
        for (Eigen::Index l = 0; l < m; ++l)
          hits[static_cast<std::size_t>(l)] += (f.col(l).array().abs() >= gamma[l]).count();
      }
      truth.theta.resize(m);
      truth.lower.resize(m);
      truth.upper.resize(m);
      for (Eigen::Index l = 0; l < m; ++l) {
        const std::int64_t h = hits[static_cast<std::size_t>(l)];
        truth.theta(l) = static_cast<double>(h) / static_cast<double>(source.n_mc);
        const Interval w = wilson_interval(h, source.n_mc, source.confidence);
        truth.lower(l) = w.lower;
        truth.upper(l) = w.upper;
      }
      break;
    }
  }
  truth.true_ranks = ranks_from_scores(truth.theta);
  return truth;
}

std::vector<ScoreTable> rank_all(const ExperimentSetup& setup, const SampleSet& samples) {
  check_setup(setup);
  const Eigen::MatrixXd flows = flow_samples(setup.model, samples.observations);
  PrefixScorer scorer(setup, samples.observations, flows);
  const std::uint64_t sum = checksum(samples);
  std::vector<ScoreTable> tables;
  for (Algorithm alg : setup.algorithms) {
    tables.push_back(scorer.score(alg, samples.observations.rows()));
    tables.back().source_checksum = sum;
  }
  return tables;
}

std::vector<Eigen::Index> default_n_grid() { return {10, 20, 50, 100, 200, 500, 1000, 5000, 10000, 100000}; }

std::vector<FalseSelectionCurve> run_false_selection(const ExperimentSetup& setup, const GroundTruth& truth,
                                                     const std::vector<std::pair<int, int>>& pairs,
                                                     const std::vector<Eigen::Index>& n_grid) {
  check_setup(setup);
  check_truth(setup, truth);
  const int m = static_cast<int>(setup.model.line_count());
  if (pairs.empty()) throw DomainError("no (k, j) pair given");
  for (auto [k, j] : pairs) {
    if (k < 1 || j < k) throw DomainError("need 1 <= k <= j, got k=" + std::to_string(k) + " j=" + std::to_string(j));
    if (j > m) throw DomainError("j=" + std::to_string(j) + " exceeds the " + std::to_string(m) + " lines");
  }
  if (n_grid.empty() || n_grid.front() < 1) throw DomainError("n grid must be non-empty and positive");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("n grid must be strictly increasing");

  std::vector<std::vector<int>> true_top;
  for (auto [k, j] : pairs) true_top.push_back(top_k(truth.true_ranks, k));

  const std::size_t n_algs = setup.algorithms.size(), n_pairs = pairs.size(), n_sizes = n_grid.size();
  // misses[r][(pair * n_algs + alg) * n_sizes + size]
  std::vector<std::vector<std::uint8_t>> misses(static_cast<std::size_t>(setup.replications));

  parallel_replications(setup.replications, setup.threads, [&](int r) {
    const SampleSet data = sample(setup.spec, n_grid.back(), setup.seed, static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd flows = flow_samples(setup.model, data.observations);
    std::vector<std::uint8_t> out(n_pairs * n_algs * n_sizes, 0);
    for (std::size_t a = 0; a < n_algs; ++a) {
      PrefixScorer scorer(setup, data.observations, flows);
      for (std::size_t s = 0; s < n_sizes; ++s) {
        const ScoreTable t = scorer.score(setup.algorithms[a], n_grid[s]);
        for (std::size_t p = 0; p < n_pairs; ++p) {
          const std::vector<int> estimated = top_k(t.ranks, pairs[p].second);
          out[(p * n_algs + a) * n_sizes + s] = !contains_all(estimated, true_top[p]);
        }
      }
    }
    misses[static_cast<std::size_t>(r)] = std::move(out);
  });

  std::vector<FalseSelectionCurve> curves;
  for (std::size_t p = 0; p < n_pairs; ++p)
    for (std::size_t a = 0; a < n_algs; ++a) {
      FalseSelectionCurve c;
      c.algorithm = setup.algorithms[a];
      c.k = pairs[p].first;
      c.j = pairs[p].second;
      c.n_grid = n_grid;
      c.replications = setup.replications;
      for (std::size_t s = 0; s < n_sizes; ++s) {
        int count = 0;
        for (const auto& rep : misses) count += rep[(p * n_algs + a) * n_sizes + s];
        c.estimates.push_back(static_cast<double>(count) / setup.replications);
      }
      curves.push_back(std::move(c));
    }
  return curves;
}

std::vector<RankIntervalReport> run_rank_intervals(const ExperimentSetup& setup, const GroundTruth& truth,
                                                   Eigen::Index n, double level) {
  check_setup(setup);
  check_truth(setup, truth);
  if (n < 1) throw DomainError("n must be at least 1");
  if (!(level > 0 && level < 1)) throw DomainError("interval level must lie in (0, 1)");
  const std::size_t m = static_cast<std::size_t>(setup.model.line_count());
  const std::size_t n_algs = setup.algorithms.size();

  // ranks[r][alg * m + line]
  std::vector<std::vector<int>> ranks(static_cast<std::size_t>(setup.replications));
  parallel_replications(setup.replications, setup.threads, [&](int r) {
    const SampleSet data = sample(setup.spec, n, setup.seed, static_cast<std::uint64_t>(r));
    std::vector<int> out;
    out.reserve(n_algs * m);
    for (const ScoreTable& t : rank_all(setup, data)) out.insert(out.end(), t.ranks.begin(), t.ranks.end());
    ranks[static_cast<std::size_t>(r)] = std::move(out);
  });

  std::vector<std::size_t> by_truth(m);
  for (std::size_t l = 0; l < m; ++l) by_truth[static_cast<std::size_t>(truth.true_ranks[l] - 1)] = l;

  const auto reps = static_cast<std::size_t>(setup.replications);
  const double tail = 0.5 * (1.0 - level);
  // Nearest-rank quantiles.
  const std::size_t lo_index =
      std::min(reps - 1, static_cast<std::size_t>(std::max(0.0, std::ceil(tail * static_cast<double>(reps)) - 1)));
  const std::size_t hi_index = std::min(
      reps - 1, static_cast<std::size_t>(std::max(0.0, std::ceil((1.0 - tail) * static_cast<double>(reps)) - 1)));

  std::vector<RankIntervalReport> reports;
  std::vector<int> column(reps);
  for (std::size_t a = 0; a < n_algs; ++a) {
    RankIntervalReport rep;
    rep.algorithm = setup.algorithms[a];
    rep.n = n;
    rep.replications = setup.replications;
    rep.level = level;
    for (std::size_t l : by_truth) {
      long sum = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        column[r] = ranks[r][a * m + l];
        sum += column[r];
      }
      std::sort(column.begin(), column.end());
      LineRankInterval li;
      li.line = static_cast<int>(l) + 1;
      li.true_rank = truth.true_ranks[l];
      li.mean_rank = static_cast<double>(sum) / static_cast<double>(reps);
      li.lo = std::min<double>(column[lo_index], li.mean_rank);
      li.hi = std::max<double>(column[hi_index], li.mean_rank);
      rep.lines.push_back(li);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_false_selection_csv(const std::vector<FalseSelectionCurve>& curves, std::ostream& out) {
  out << "algorithm,k,j,n,replications,f_hat\n";
  for (const auto& c : curves)
    for (std::size_t s = 0; s < c.n_grid.size(); ++s)
      out << to_string(c.algorithm) << ',' << c.k << ',' << c.j << ',' << c.n_grid[s] << ',' << c.replications << ','
          << csv::format(c.estimates[s]) << '\n';
}

void write_rank_intervals_csv(const std::vector<RankIntervalReport>& reports, std::ostream& out) {
  out << "algorithm,n,line,true_rank,mean_rank,lo,hi\n";
  for (const auto& r : reports)
    for (const auto& l : r.lines)
      out << to_string(r.algorithm) << ',' << r.n << ',' << l.line << ',' << l.true_rank << ','
          << csv::format(l.mean_rank) << ',' << csv::format(l.lo) << ',' << csv::format(l.hi) << '\n';
}

void write_ground_truth_csv(const GroundTruth& truth, std::ostream& out) {
  out << "line,theta,rank,source\n";
  for (Eigen::Index l = 0; l < truth.theta.size(); ++l)
    out << l + 1 << ',' << csv::format(truth.theta(l)) << ',' << truth.true_ranks[static_cast<std::size_t>(l)] << ','
        << to_string(truth.source.kind) << '\n';
}

}  // namespace linerank
