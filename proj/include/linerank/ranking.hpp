#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "linerank/case_io.hpp"
#include "linerank/dc_model.hpp"
#include "linerank/rate_function.hpp"

namespace linerank {

enum class Algorithm {
  rate_function = 1,  // alg1: empirical rate function
  counting = 2,       // alg2: empirical overload frequency
  gaussian = 3,       // alg3: Gaussian MLE tails
  laplace = 4,        // alg4: Laplace large-deviations linear program
};

std::string_view to_string(Algorithm alg);
/// Accepts "1".."4" or "alg1".."alg4".
Algorithm parse_algorithm(std::string_view text);
inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::rate_function, Algorithm::counting,
                                               Algorithm::gaussian, Algorithm::laplace};

/// Per-line overload thresholds, per-unit. +inf marks an unrated line.
class Thresholds {
public:
  explicit Thresholds(Eigen::VectorXd gamma);

  /// RATE_A / base MVA; a zero rating becomes +inf.
  static Thresholds from_ratings(const GridCase& grid);
  /// gamma_l = multiplier * |nu_l|.
  static Thresholds from_flow_multiplier(const Eigen::VectorXd& nominal_flows, double multiplier);

  const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
  Eigen::Index size() const noexcept { return gamma_.size(); }
  double operator[](Eigen::Index l) const { return gamma_(l); }

private:
  Eigen::VectorXd gamma_;
};

/// Scores Theta_l in [0, 1] for every line plus the derived ranking.
struct ScoreTable {
  Eigen::VectorXd scores;
  Eigen::VectorXd rate_values;  // J (alg1), H (alg4), -log(score) otherwise
  std::vector<std::uint8_t> saturated;
  std::vector<int> ranks;  // ranks[l] = R_l, 1 = most likely to overload
  Algorithm algorithm = Algorithm::rate_function;
  Eigen::Index n = 0;
  // Wilson interval per line; filled by alg2 only.
  Eigen::VectorXd lower, upper;
  // Checksum of the SampleSet the table was computed from (0 if unknown).
  std::uint64_t source_checksum = 0;
};

struct RateDiagnostics {
  Eigen::VectorXd lambda_star;
  Eigen::VectorXd j_hat;
  std::vector<std::uint8_t> saturated;
};

/// Descending stable ordering; ties go to the lower line index. Throws DomainError on NaN.
std::vector<int> ranks_from_scores(const Eigen::Ref<const Eigen::VectorXd>& scores);

/// 1-based line numbers of the j best-ranked lines, ascending.
std::vector<int> top_k(std::span<const int> ranks, int j);

/// True when every line of `subset` appears in `superset` (both as returned by top_k).
bool contains_all(std::span<const int> superset, std::span<const int> subset);

/// Alg. 1 on an n x m matrix of line flows.
std::pair<ScoreTable, RateDiagnostics> alg1_rate_function(const Eigen::Ref<const Eigen::MatrixXd>& flow_samples,
                                                          const Thresholds& gamma);

/// Alg. 1 in online form: one EmpiricalRateFunction per line, warm-started between calls.
class RateFunctionRanker {
public:
  explicit RateFunctionRanker(Thresholds gamma);

  /// Appends rows of an n x m flow matrix.
  void append(const Eigen::Ref<const Eigen::MatrixXd>& flow_rows);
  std::pair<ScoreTable, RateDiagnostics> score();
  Eigen::Index size() const;

private:
  Thresholds gamma_;
  std::vector<EmpiricalRateFunction> lines_;
};

/// Alg. 2: fraction of samples with |F| >= gamma, plus a Wilson interval per line.
ScoreTable alg2_counting(const Eigen::Ref<const Eigen::MatrixXd>& flow_samples, const Thresholds& gamma,
                         double confidence = 0.95);

/// Two-sided normal tail P(|N(nu, sigma^2)| >= gamma) per line. Zero sigma collapses to the
/// indicator of gamma <= |nu|.
Eigen::VectorXd gaussian_tail_probabilities(const Eigen::VectorXd& nu, const Eigen::VectorXd& sigma,
                                            const Thresholds& gamma);

/// Alg. 3: MLE covariance around the known mean, then exact normal tails of each flow.
ScoreTable alg3_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& injection_samples, const DcModel& model,
                         const Eigen::VectorXd& mu, const Thresholds& gamma);

/// Alg. 3 scoring with a given covariance (no estimation).
ScoreTable gaussian_scores(const DcModel& model, const Eigen::VectorXd& mu, const Eigen::MatrixXd& covariance,
                           const Thresholds& gamma);

/// Minimum of sum_i |q_i| / alpha_i over {q : w.q >= c}: c / max_i(alpha_i |w_i|) for c > 0,
/// 0 for c <= 0, +inf when the halfspace is unreachable.
double weighted_l1_halfspace(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                             double c);

/// Large-deviations rate H of line overload for independent Laplace injections, solved as a
/// linear program in (p, z) with the simplex. `sign` orients the overload direction.
double laplace_rate_lp(const Eigen::Ref<const Eigen::VectorXd>& v_s_row, double nominal_flow, double gamma,
                       const Eigen::Ref<const Eigen::VectorXd>& alpha, double sign);

struct LaplaceOptions {
  double epsilon = 1.0;
  /// Re-solve every line with the simplex and require agreement with the closed form.
  bool verify_with_lp = true;
  double verify_tolerance = 1e-7;
};

/// Alg. 4: mean absolute deviation scales, then Theta = exp(-H / epsilon).
ScoreTable alg4_laplace(const Eigen::Ref<const Eigen::MatrixXd>& injection_samples, const DcModel& model,
                        const Eigen::VectorXd& mu, const Thresholds& gamma, const LaplaceOptions& options = {});

/// Alg. 4 scoring with known mean and scales.
ScoreTable laplace_scores(const DcModel& model, const Eigen::VectorXd& mu, const Eigen::VectorXd& alpha,
                          const Thresholds& gamma,
                          const LaplaceOptions& options = {});

/// CSV `line,score,rate_value,rank,saturated,algorithm,n`.
void write_score_table_csv(const ScoreTable& table, std::ostream& out);

}  // namespace linerank
