#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "linerank/philox.hpp"

namespace linerank {

enum class Distribution { gaussian, laplace };

std::string_view to_string(Distribution kind);

/// Multivariate normal injections N(mean, covariance), per-unit.
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Independent Laplace injections with density (2 eps a_i)^-1 exp(-|x - mean_i| / (eps a_i)).
struct LaplaceSpec {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // a_i > 0
  double epsilon = 1.0;
};

using InjectionModel = std::variant<GaussianSpec, LaplaceSpec>;

Distribution kind_of(const InjectionModel& spec);
const Eigen::VectorXd& mean_of(const InjectionModel& spec);

/// n x d block of iid injection draws.
struct SampleSet {
  Eigen::MatrixXd observations;
  std::uint64_t seed = 0;
  Distribution spec_kind = Distribution::gaussian;
};

struct CovarianceBuild {
  Eigen::MatrixXd covariance;  // per-unit^2
  double ridge = 0.0;          // tau added to the diagonal to restore positive definiteness
};

/// Case-study covariance: diagonal variance_factor * |mu_i| (MW^2), off-diagonals copied from
/// A A^T where A is d x d with iid N(0, offdiag_variance) entries drawn from the
/// (seed, "covariance") stream. Converted to per-unit^2. A ridge tau I with the smallest
/// tau in {1e-8, 1e-7, ...} is added when the result is not positive definite.
CovarianceBuild case_study_covariance(const Eigen::Ref<const Eigen::VectorXd>& mu_mw, double variance_factor,
                                 double offdiag_variance, std::uint64_t seed, double base_mva);

/// Laplace scales with the given variances: a_i = sqrt(Var_i / 2).
LaplaceSpec laplace_with_variances(const Eigen::VectorXd& mean, const Eigen::VectorXd& variances,
                                   double epsilon = 1.0);

/// Stream purpose tags.
inline constexpr std::string_view kGaussianStream = "gaussian";
inline constexpr std::string_view kLaplaceStream = "laplace";

/// Rows [first_row, first_row + count) of the stream; row t always receives the same draw,
/// so growing n with the same key extends the sample.
Eigen::MatrixXd sample_rows(const InjectionModel& spec, std::uint64_t first_row, Eigen::Index count,
                            const rng::StreamKey& key);

SampleSet sample_gaussian(const GaussianSpec& spec, Eigen::Index n, std::uint64_t seed,
                          std::uint64_t replication = 0);
SampleSet sample_laplace(const LaplaceSpec& spec, Eigen::Index n, std::uint64_t seed,
                         std::uint64_t replication = 0);
SampleSet sample(const InjectionModel& spec, Eigen::Index n, std::uint64_t seed,
                 std::uint64_t replication = 0);

/// FNV-1a over the bit patterns of the observations.
std::uint64_t checksum(const SampleSet& samples);

/// CSV with header `t,p_1,...,p_d`, values in MW (per-unit times base_mva).
void write_samples_csv(const SampleSet& samples, std::ostream& out, double base_mva);
SampleSet read_samples_csv(std::istream& in, double base_mva);

}  // namespace linerank
