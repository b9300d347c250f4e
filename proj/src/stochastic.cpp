#include "linerank/stochastic.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"

namespace linerank {

std::string_view to_string(Distribution kind) {
  return kind == Distribution::gaussian ? "gaussian" : "laplace";
}

Distribution kind_of(const InjectionModel& spec) {
  return std::holds_alternative<GaussianSpec>(spec) ? Distribution::gaussian : Distribution::laplace;
}

const Eigen::VectorXd& mean_of(const InjectionModel& spec) {
  return std::visit([](const auto& s) -> const Eigen::VectorXd& { return s.mean; }, spec);
}

CovarianceBuild case_study_covariance(const Eigen::Ref<const Eigen::VectorXd>& mu_mw, double variance_factor,
                                 double offdiag_variance, std::uint64_t seed, double base_mva) {
  if (!(offdiag_variance >= 0)) throw DomainError("off-diagonal variance must be non-negative");
  if (!(variance_factor >= 0)) throw DomainError("variance factor must be non-negative");
  if (!(base_mva > 0)) throw DomainError("base MVA must be positive");
  const Eigen::Index d = mu_mw.size();

  const rng::CounterStream stream(rng::StreamKey{seed, "covariance", 0});
  const double sd = std::sqrt(offdiag_variance);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      a(i, j) = sd * stream.normal(static_cast<std::uint64_t>(i), static_cast<std::uint32_t>(j));

  Eigen::MatrixXd sigma = a * a.transpose();
  sigma = (sigma + sigma.transpose()) / 2.0;
  sigma.diagonal() = variance_factor * mu_mw.cwiseAbs();
  sigma /= base_mva * base_mva;

  CovarianceBuild out{sigma, 0.0};
  if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() == Eigen::Success) return out;
  for (double tau = 1e-8; tau <= 1e8; tau *= 10.0) {
    Eigen::MatrixXd repaired = sigma;
    repaired.diagonal().array() += tau;
    if (Eigen::LLT<Eigen::MatrixXd>(repaired).info() == Eigen::Success) return {repaired, tau};
  }
  throw NumericError("covariance could not be repaired to positive definite");
}

LaplaceSpec laplace_with_variances(const Eigen::VectorXd& mean, const Eigen::VectorXd& variances,
                                   double epsilon) {
  if (mean.size() != variances.size()) throw DomainError("mean and variance lengths differ");
  if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
  LaplaceSpec spec{mean, (variances / 2.0).cwiseSqrt() / epsilon, epsilon};
  if (!(spec.scale.array() > 0).all()) throw DomainError("Laplace scales must be positive");
  return spec;
}

namespace {

Eigen::MatrixXd gaussian_rows(const GaussianSpec& spec, std::uint64_t first_row, Eigen::Index count,
                              const rng::CounterStream& stream) {
  const Eigen::Index d = spec.mean.size();
  if (spec.covariance.rows() != d || spec.covariance.cols() != d)
    throw DomainError("covariance dimension does not match mean");
  Eigen::LLT<Eigen::MatrixXd> llt(spec.covariance);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();

  Eigen::MatrixXd z(count, d);
  for (Eigen::Index t = 0; t < count; ++t)
    for (Eigen::Index i = 0; i < d; ++i)
      z(t, i) = stream.normal(first_row + static_cast<std::uint64_t>(t), static_cast<std::uint32_t>(i));
  Eigen::MatrixXd out = z * lower.transpose();
  out.rowwise() += spec.mean.transpose();
  return out;
}

Eigen::MatrixXd laplace_rows(const LaplaceSpec& spec, std::uint64_t first_row, Eigen::Index count,
                             const rng::CounterStream& stream) {
  const Eigen::Index d = spec.mean.size();
  if (spec.scale.size() != d) throw DomainError("scale dimension does not match mean");
  if (!(spec.scale.array() > 0).all()) throw DomainError("Laplace scales must be positive");
  if (!(spec.epsilon > 0)) throw DomainError("epsilon must be positive");
  Eigen::MatrixXd out(count, d);
  for (Eigen::Index t = 0; t < count; ++t)
    for (Eigen::Index i = 0; i < d; ++i)
      out(t, i) = spec.mean(i) + spec.epsilon * spec.scale(i) *
                                     stream.laplace(first_row + static_cast<std::uint64_t>(t),
                                                    static_cast<std::uint32_t>(i));
  return out;
}

}  // namespace

Eigen::MatrixXd sample_rows(const InjectionModel& spec, std::uint64_t first_row, Eigen::Index count,
                            const rng::StreamKey& key) {
  if (count < 0) throw DomainError("negative sample count");
  const rng::CounterStream stream(key);
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) return gaussian_rows(*g, first_row, count, stream);
  return laplace_rows(std::get<LaplaceSpec>(spec), first_row, count, stream);
}

SampleSet sample_gaussian(const GaussianSpec& spec, Eigen::Index n, std::uint64_t seed,
                          std::uint64_t replication) {
  return sample(InjectionModel{spec}, n, seed, replication);
}

SampleSet sample_laplace(const LaplaceSpec& spec, Eigen::Index n, std::uint64_t seed,
                         std::uint64_t replication) {
  return sample(InjectionModel{spec}, n, seed, replication);
}

SampleSet sample(const InjectionModel& spec, Eigen::Index n, std::uint64_t seed, std::uint64_t replication) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  const Distribution kind = kind_of(spec);
  const auto purpose = kind == Distribution::gaussian ? kGaussianStream : kLaplaceStream;
  return SampleSet{sample_rows(spec, 0, n, rng::StreamKey{seed, purpose, replication}), seed, kind};
}

std::uint64_t checksum(const SampleSet& samples) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  const auto& obs = samples.observations;
  for (Eigen::Index i = 0; i < obs.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(obs.data()[i]);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
  return h;
}

void write_samples_csv(const SampleSet& samples, std::ostream& out, double base_mva) {
  const auto& obs = samples.observations;
  out << 't';
  for (Eigen::Index i = 0; i < obs.cols(); ++i) out << ",p_" << i + 1;
  out << '\n';
  for (Eigen::Index t = 0; t < obs.rows(); ++t) {
    out << t + 1;
    for (Eigen::Index i = 0; i < obs.cols(); ++i) out << ',' << csv::format(obs(t, i) * base_mva);
    out << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in, double base_mva) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty sample file", 1);
  const auto header = csv::split(line);
  if (header.size() < 2 || header.front() != "t") throw ParseError("sample header must be t,p_1..p_d", 1);
  const auto d = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<double> values;
  std::size_t lineno = 1;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1)
      throw ParseError("expected " + std::to_string(d + 1) + " fields", lineno);
    try {
      for (std::size_t i = 1; i < fields.size(); ++i) values.push_back(csv::parse_double(fields[i]) / base_mva);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("sample file has no observations", lineno);
  SampleSet s;
  s.observations = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, d);
  return s;
}

}  // namespace linerank
