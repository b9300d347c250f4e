#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "linerank/dc_model.hpp"
#include "linerank/ranking.hpp"
#include "linerank/stochastic.hpp"

namespace linerank {

/// Parameters of the 39-bus case study.
struct CaseStudyParameters {
  double variance_factor = 5.0;    // Var_i = factor * |mu_i| (MW^2)
  double offdiag_variance = 25.0;  // entries of A in A A^T
  std::uint64_t covariance_seed = 948;
  double epsilon = 1.0;            // Laplace scale multiplier
};

/// Gaussian: case_study_covariance around the model's nominal injections. Laplace: independent
/// coordinates with the same marginal variances.
InjectionModel case_study_model(const DcModel& model, Distribution kind, const CaseStudyParameters& params);

enum class TruthKind { analytic_gaussian, laplace_ldp_perfect, monte_carlo };

std::string_view to_string(TruthKind kind);

struct TruthSource {
  TruthKind kind = TruthKind::analytic_gaussian;
  Eigen::Index n_mc = 1'000'000;
  std::uint64_t seed = 0;
  double confidence = 0.99;  // Wilson level recorded for monte_carlo
};

struct GroundTruth {
  Eigen::VectorXd theta;
  std::vector<int> true_ranks;
  TruthSource source;
  // Wilson interval of theta; monte_carlo only.
  Eigen::VectorXd lower, upper;
};

/// Stream tag of the ground-truth Monte Carlo sample.
inline constexpr std::string_view kTruthStream = "mc-truth";

/// Ground truth with perfect knowledge of the injection law. laplace_ldp_perfect gives
/// large-deviations approximations: meaningful as ranks, not as probabilities.
GroundTruth ground_truth(const DcModel& model, const InjectionModel& spec, const Thresholds& gamma,
                         const TruthSource& source);

/// Everything the replicated experiments share.
struct ExperimentSetup {
  DcModel model;
  InjectionModel spec;
  Thresholds gamma;
  std::vector<Algorithm> algorithms;
  LaplaceOptions laplace;
  std::uint64_t seed = 0;
  int replications = 100;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs every selected algorithm on one sample with the spec's known mean. All tables carry
/// the checksum of `samples`.
std::vector<ScoreTable> rank_all(const ExperimentSetup& setup, const SampleSet& samples);

struct FalseSelectionCurve {
  Algorithm algorithm = Algorithm::rate_function;
  int k = 1;
  int j = 1;
  std::vector<Eigen::Index> n_grid;
  std::vector<double> estimates;  // f_hat per entry of n_grid
  int replications = 0;
};

std::vector<Eigen::Index> default_n_grid();

/// Probability that the true top-k lines are not all inside the estimated top-j lines, for
/// every (k, j) pair, algorithm and n. Each replication draws one stream and the dataset for
/// n is the first n rows of it. Curves are ordered by pair, then algorithm.
std::vector<FalseSelectionCurve> run_false_selection(const ExperimentSetup& setup, const GroundTruth& truth,
                                                     const std::vector<std::pair<int, int>>& pairs,
                                                     const std::vector<Eigen::Index>& n_grid);

struct LineRankInterval {
  int line = 0;  // 1-based
  int true_rank = 0;
  double mean_rank = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct RankIntervalReport {
  Algorithm algorithm = Algorithm::rate_function;
  Eigen::Index n = 0;
  int replications = 0;
  double level = 0.95;
  std::vector<LineRankInterval> lines;  // sorted by true rank
};

/// Distribution of each line's estimated rank over replications at a fixed n. The interval is
/// the central empirical quantile range at `level`, widened if needed to contain the mean.
std::vector<RankIntervalReport> run_rank_intervals(const ExperimentSetup& setup, const GroundTruth& truth,
                                                   Eigen::Index n, double level = 0.95);

void write_false_selection_csv(const std::vector<FalseSelectionCurve>& curves, std::ostream& out);
void write_rank_intervals_csv(const std::vector<RankIntervalReport>& reports, std::ostream& out);
void write_ground_truth_csv(const GroundTruth& truth, std::ostream& out);

}  // namespace linerank
