// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linerank/case_io.hpp"
#include "linerank/dc_model.hpp"
#include "linerank/experiments.hpp"
#include "linerank/ranking.hpp"
#include "linerank/rate_function.hpp"
#include "linerank/stats.hpp"
#include "linerank/stochastic.hpp"
#include "../oracles.hpp"

using namespace linerank;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s  %-28s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), s);
  std::fflush(stdout);
  failures += !o.pass;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const GridCase& case39() {
  static const GridCase g = load_case(LINERANK_DATA_DIR "/case39.m");
  return g;
}

ExperimentSetup setup39(Distribution dist, int replications, std::vector<Algorithm> algs) {
  const DcModel model = build_dc_model(case39());
  InjectionModel spec = case_study_model(model, dist, {});
  ExperimentSetup s{model, spec, Thresholds::from_ratings(case39()), std::move(algs), {}, 2024, replications, 0};
  return s;
}

Outcome laplace_lp_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(-1, 1), a(0.01, 3);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + int(gen() % 10);
    Eigen::VectorXd w(d), alpha(d);
    for (int i = 0; i < d; ++i) {
      w(i) = u(gen);
      alpha(i) = a(gen);
    }
    const double nu = u(gen), gamma = 0.05 + 2 * std::abs(u(gen));
    const double sign = nu >= 0 ? 1.0 : -1.0;
    const double lp = laplace_rate_lp(w, nu, gamma, alpha, sign);
    const double want = oracle::weighted_l1_dual(w, alpha, gamma - std::abs(nu));
    if (std::isinf(want) != std::isinf(lp)) return {false, "finiteness disagrees at trial " + std::to_string(trial)};
    if (!std::isinf(want)) worst = std::max(worst, std::abs(lp - want) / std::max(1.0, want));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-9 && t < 5.0, fmt("200 instances, max error %.2e, %.2f s", worst, t)};
}

Outcome rate_function_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(202);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + gen() % 996;
    const double scale = 0.1 + 3 * frac(gen), shift = frac(gen);
    std::vector<double> x(n);
    for (auto& v : x) v = std::abs(shift + scale * z(gen));
    const SampleSummary s = summarize(x);
    const double gamma = s.mean + frac(gen) * (s.max - s.mean);
    const double j = estimate_rate(x, gamma).rate;
    const double want = oracle::rate_grid_search(x, gamma, 1e-5).second;
    worst = std::max(worst, std::abs(j - want));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-6 && t < 10.0, fmt("50 samples, max |dJ| %.2e, %.2f s", worst, t)};
}

Outcome analytic_tail_consistency() {
  // One stochastic node feeding one line; the threshold puts theta near 0.1.
  const GridCase g = parse_case(std::string_view("mpc.baseMVA = 100;\nmpc.bus = [1 3 0; 2 1 100];\nmpc.gen = [1 100];\n"
                                                 "mpc.branch = [1 2 0 0.1 0 0 0 0 0];\n"));
  const DcModel m = build_dc_model(g);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, 0.25);
  const double sigma = std::abs(m.v_s(0, 0)) * 0.5;
  const Thresholds gamma(Eigen::VectorXd::Constant(1, std::abs(m.nominal_flows(0)) + 1.28 * sigma));
  const GaussianSpec spec{m.nominal_stochastic, cov};
  const double theta = gaussian_scores(m, spec.mean, cov, gamma).scores(0);

  bool ok = true;
  std::string detail = fmt("theta %.4f;", theta);
  for (Eigen::Index n : {100, 10000}) {
    const SampleSet s = sample(spec, n, 77);
    const double est = alg3_gaussian(s.observations, m, spec.mean, gamma).scores(0);
    const double bound = 5.0 / std::sqrt(double(n)) * theta;
    ok = ok && std::abs(est - theta) <= bound;
    detail += fmt(" n=%.0f |err| %.2e <= %.2e;", double(n), std::abs(est - theta), bound);
  }
  int covered = 0;
  for (int r = 0; r < 100; ++r) {
    const SampleSet s = sample(spec, 1000, 78, static_cast<std::uint64_t>(r));
    const ScoreTable t = alg2_counting(flow_samples(m, s.observations), gamma, 0.99);
    covered += t.lower(0) <= theta && theta <= t.upper(0);
  }
  ok = ok && covered >= 95;
  detail += " alg2 99% Wilson coverage " + std::to_string(covered) + "/100";
  return {ok, detail};
}

Outcome dc_invariants() {
  const auto start = std::chrono::steady_clock::now();
  const DcModel m = build_dc_model(case39());
  const double t = seconds_since(start);
  const Eigen::MatrixXd& l = m.laplacian;
  const Eigen::MatrixXd& p = m.laplacian_pinv;
  const double penrose = std::max({(l * p * l - l).cwiseAbs().maxCoeff(), (p * l * p - p).cwiseAbs().maxCoeff(),
                                   ((l * p).transpose() - l * p).cwiseAbs().maxCoeff(),
                                   ((p * l).transpose() - p * l).cwiseAbs().maxCoeff()});
  const double rows = m.ptdf.rowwise().sum().cwiseAbs().maxCoeff();
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  double kcl = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(m.bus_count());
    for (auto& v : x) v = z(gen);
    kcl = std::max(kcl, (m.incidence.transpose() * (m.ptdf * x) - (x.array() - x.mean()).matrix()).cwiseAbs().maxCoeff());
  }
  const bool ok = penrose <= 1e-8 && rows <= 1e-8 && kcl <= 1e-8 && t < 1.0;
  return {ok, fmt("Penrose %.1e, row sums %.1e, KCL %.1e, build %.3f s", penrose, rows, kcl, t)};
}

Outcome qualitative_top_line() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (Distribution dist : {Distribution::gaussian, Distribution::laplace}) {
    const Algorithm parametric = dist == Distribution::gaussian ? Algorithm::gaussian : Algorithm::laplace;
    const ExperimentSetup s = setup39(dist, 1, {Algorithm::rate_function, parametric});
    const GroundTruth mc = ground_truth(s.model, s.spec, s.gamma, {TruthKind::monte_carlo, 1'000'000, 5, 0.99});
    const SampleSet data = sample(s.spec, 10000, 6);
    const auto tables = rank_all(s, data);
    const int truth = top_k(mc.true_ranks, 1).front();
    const int a1 = top_k(tables[0].ranks, 1).front(), ap = top_k(tables[1].ranks, 1).front();
    ok = ok && a1 == truth && ap == truth;
    detail += std::string(to_string(dist)) + ": MC " + std::to_string(truth) + " alg1 " + std::to_string(a1) + " " +
              std::string(to_string(parametric)) + " " + std::to_string(ap) + "; ";
  }
  detail += fmt("%.1f s", seconds_since(start));
  return {ok, detail};
}

Outcome qualitative_false_selection() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Eigen::Index> grid{10, 20, 50, 100, 200, 500, 1000};
  std::string detail;
  bool ok = true;
  for (Distribution dist : {Distribution::gaussian, Distribution::laplace}) {
    const Algorithm parametric = dist == Distribution::gaussian ? Algorithm::gaussian : Algorithm::laplace;
    const ExperimentSetup s = setup39(dist, 100, {Algorithm::rate_function, Algorithm::counting, parametric});
    const TruthKind kind = dist == Distribution::gaussian ? TruthKind::analytic_gaussian : TruthKind::laplace_ldp_perfect;
    const GroundTruth truth = ground_truth(s.model, s.spec, s.gamma, {kind});
    const auto curves = run_false_selection(s, truth, {{1, 1}}, grid);
    const auto& alg1 = curves[0].estimates;
    const auto& alg2 = curves[1].estimates;
    const auto& par = curves[2].estimates;
    bool reached = true;
    std::string violations;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] >= 100 && par[i] != 0.0) reached = false;
      if (alg1[i] > alg2[i]) violations += fmt(" n=%.0f %.2f>%.2f", double(grid[i]), alg1[i], alg2[i]);
    }
    ok = ok && reached && violations.empty();
    detail += std::string(to_string(dist)) + ": " + std::string(to_string(parametric)) + " f(n=100) " +
              fmt("%.2f", par[3]) + ", alg1 <= alg2 " + (violations.empty() ? "at every n" : "fails at" + violations) +
              fmt(" (alg1/alg2 at n=10,100: %.2f/%.2f %.2f/%.2f); ", alg1[0], alg2[0], alg1[3], alg2[3]);
  }
  const double t = seconds_since(start);
  detail += fmt("%.1f s", t);
  return {ok && t < 1800, detail};
}

Outcome misspecification() {
  const ExperimentSetup s = setup39(Distribution::laplace, 100, {Algorithm::gaussian, Algorithm::laplace});
  const GroundTruth truth = ground_truth(s.model, s.spec, s.gamma, {TruthKind::laplace_ldp_perfect});
  const auto curves = run_false_selection(s, truth, {{2, 3}}, {10000});
  const double f3 = curves[0].estimates[0], f4 = curves[1].estimates[0];
  return {f3 > f4, fmt("laplace data, n=1e4, 100 replications: alg3 f(2,3) %.2f, alg4 f(2,3) %.2f", f3, f4)};
}

Outcome determinism() {
  auto run = [](unsigned threads) {
    ExperimentSetup s = setup39(Distribution::laplace, 8, {kAllAlgorithms, kAllAlgorithms + 4});
    s.threads = threads;
    std::ostringstream out;
    const GroundTruth truth = ground_truth(s.model, s.spec, s.gamma, {TruthKind::monte_carlo, 200000, 1, 0.99});
    write_ground_truth_csv(truth, out);
    write_false_selection_csv(run_false_selection(s, truth, {{1, 1}, {2, 3}}, {10, 100, 1000}), out);
    write_rank_intervals_csv(run_rank_intervals(s, truth, 500), out);
    for (const ScoreTable& t : rank_all(s, sample(s.spec, 2000, 3))) write_score_table_csv(t, out);
    return out.str();
  };
  const std::string a = run(1), b = run(1), c = run(3);
  return {a == b && a == c, "repeat and 1 vs 3 threads: " + std::string(a == b && a == c ? "identical" : "differ") +
                                 " (" + std::to_string(a.size()) + " bytes)"};
}

}  // namespace

int main() {
  report("alg4-lp-oracle", laplace_lp_oracle);
  report("alg1-grid-oracle", rate_function_oracle);
  report("alg3-alg2-analytic-tail", analytic_tail_consistency);
  report("dc-model-invariants", dc_invariants);
  report("39bus-top-line", qualitative_top_line);
  report("39bus-false-selection", qualitative_false_selection);
  report("misspecification-alg3-vs-alg4", misspecification);
  report("determinism", determinism);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
