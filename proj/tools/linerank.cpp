// linerank: rank transmission lines by overload probability from simulated injections.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "linerank/case_io.hpp"
#include "linerank/csv.hpp"
#include "linerank/dc_model.hpp"
#include "linerank/errors.hpp"
#include "linerank/experiments.hpp"
#include "linerank/ranking.hpp"
#include "linerank/stochastic.hpp"

namespace fs = std::filesystem;
using namespace linerank;

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string case_path;
  std::string config_path;
  std::string dist = "gaussian";
  Eigen::Index n = 1000;
  std::string algs = "1,2,3,4";
  std::uint64_t seed = 1;
  std::uint64_t cov_seed = CaseStudyParameters{}.covariance_seed;
  double variance_factor = 5.0;
  double offdiag_variance = 25.0;
  double epsilon = 1.0;
  double gamma_mult = 0.0;
  std::string gamma_file;
  std::string kind = "both";
  std::string k = "1";
  std::string j = "1";
  std::string n_grid;
  int replications = 1000;
  double level = 0.95;
  std::string truth = "auto";
  Eigen::Index n_mc = 1'000'000;
  std::uint64_t truth_seed = 0;
  unsigned threads = 0;
  bool no_lp_verify = false;
  bool write_samples = false;
  bool dump_model = false;
  std::string out = ".";
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  for (auto& item : csv::split(text))
    if (!item.empty()) items.emplace_back(item);
  return items;
}

template <typename T>
std::vector<T> parse_integers(const std::string& text, const char* what) {
  std::vector<T> values;
  for (const auto& item : split_list(text)) {
    T v{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw UsageError(std::string("invalid ") + what + " entry '" + item + "'");
    values.push_back(v);
  }
  return values;
}

// Expands `--config FILE` into `--key value` arguments placed right after the subcommand, so
// that flags given on the command line (which come later) take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;

  std::ifstream in(config);
  if (!in) throw UsageError("cannot open config file '" + config + "'");
  std::vector<std::string> extra;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(config + ":" + std::to_string(number) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    if (value == "true") extra.push_back("--" + key);
    else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  std::size_t sub = 0;
  while (sub < args.size() && args[sub].rfind("-", 0) == 0) ++sub;
  const auto at = args.begin() + static_cast<std::ptrdiff_t>(std::min(sub + 1, args.size()));
  args.insert(at, extra.begin(), extra.end());
  return args;
}

GridCase read_case(const Options& o) {
  if (o.case_path.empty()) throw UsageError("--case is required");
  if (!fs::exists(o.case_path)) throw UsageError("case file not found: " + o.case_path);
  GridCase grid = load_case(o.case_path);
  validate(grid);
  return grid;
}

Distribution read_distribution(const Options& o) {
  if (o.dist == "gaussian") return Distribution::gaussian;
  if (o.dist == "laplace") return Distribution::laplace;
  throw UsageError("--dist must be gaussian or laplace, got '" + o.dist + "'");
}

std::vector<Algorithm> read_algorithms(const Options& o) {
  std::vector<Algorithm> algs;
  for (const auto& item : split_list(o.algs)) {
    try {
      algs.push_back(parse_algorithm(item));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (algs.empty()) throw UsageError("--algs selects no algorithm");
  return algs;
}

// CSV `line,gamma` with one row per line, gamma in MW.
Thresholds read_gamma_file(const std::string& path, const DcModel& model) {
  std::ifstream in(path);
  if (!in) throw UsageError("gamma file not found: " + path);
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(model.line_count(), std::nan(""));
  std::string row;
  int number = 0;
  while (std::getline(in, row)) {
    ++number;
    if (number == 1 || row.empty()) continue;
    const auto cells = csv::split(row);
    if (cells.size() != 2) throw ParseError("gamma file: expected line,gamma", number);
    const auto line = static_cast<Eigen::Index>(csv::parse_double(cells[0]));
    if (line < 1 || line > model.line_count()) throw ParseError("gamma file: line out of range", number);
    gamma(line - 1) = csv::parse_double(cells[1]) / model.base_mva;
  }
  for (Eigen::Index l = 0; l < gamma.size(); ++l)
    if (std::isnan(gamma(l))) throw ValidationError("gamma file has no threshold for line " + std::to_string(l + 1));
  return Thresholds(gamma);
}

Thresholds read_thresholds(const Options& o, const GridCase& grid, const DcModel& model) {
  if (!o.gamma_file.empty() && o.gamma_mult > 0) throw UsageError("--gamma-file and --gamma-mult are exclusive");
  if (!o.gamma_file.empty()) return read_gamma_file(o.gamma_file, model);
  if (o.gamma_mult > 0) return Thresholds::from_flow_multiplier(model.nominal_flows, o.gamma_mult);
  return Thresholds::from_ratings(grid);
}

ExperimentSetup make_setup(const Options& o, const GridCase& grid, DcModel model) {
  CaseStudyParameters params;
  params.variance_factor = o.variance_factor;
  params.offdiag_variance = o.offdiag_variance;
  params.covariance_seed = o.cov_seed;
  params.epsilon = o.epsilon;
  InjectionModel spec = case_study_model(model, read_distribution(o), params);
  Thresholds gamma = read_thresholds(o, grid, model);
  ExperimentSetup setup{std::move(model), std::move(spec), std::move(gamma), read_algorithms(o), {}, o.seed,
                        o.replications, o.threads};
  setup.laplace.verify_with_lp = !o.no_lp_verify;
  return setup;
}

fs::path output_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const Options& o,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream out = open_output(dir / "manifest.txt");
  out << "# linerank " << kVersion << ", Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << "\n# command: " << command << "\n# replay: linerank " << command
      << " --config manifest.txt\n";
  out << "case=" << o.case_path << "\ndist=" << o.dist << "\nalgs=" << o.algs << "\nseed=" << o.seed
      << "\ncov-seed=" << o.cov_seed << "\nvariance-factor=" << csv::format(o.variance_factor)
      << "\noffdiag-variance=" << csv::format(o.offdiag_variance) << "\nepsilon=" << csv::format(o.epsilon) << '\n';
  if (!o.gamma_file.empty()) out << "gamma-file=" << o.gamma_file << '\n';
  if (o.gamma_mult > 0) out << "gamma-mult=" << csv::format(o.gamma_mult) << '\n';
  if (o.no_lp_verify) out << "no-lp-verify=true\n";
  for (const auto& [key, value] : extra) out << key << '=' << value << '\n';
}

TruthSource read_truth(const Options& o, Distribution dist) {
  TruthSource src;
  src.n_mc = o.n_mc;
  src.seed = o.truth_seed;
  if (o.truth == "auto") src.kind = dist == Distribution::gaussian ? TruthKind::analytic_gaussian
                                                                    : TruthKind::laplace_ldp_perfect;
  else if (o.truth == "analytic") src.kind = TruthKind::analytic_gaussian;
  else if (o.truth == "ldp") src.kind = TruthKind::laplace_ldp_perfect;
  else if (o.truth == "mc") src.kind = TruthKind::monte_carlo;
  else throw UsageError("--truth must be auto, analytic, ldp or mc");
  if (src.kind == TruthKind::analytic_gaussian && dist != Distribution::gaussian)
    throw UsageError("--truth analytic needs --dist gaussian");
  if (src.kind == TruthKind::laplace_ldp_perfect && dist != Distribution::laplace)
    throw UsageError("--truth ldp needs --dist laplace");
  return src;
}

int cmd_parse(const Options& o) {
  const GridCase grid = read_case(o);
  const DcModel model = build_dc_model(grid);
  std::cout << "buses " << grid.bus_count() << "\nbranches " << grid.branch_count() << "\ngenerators "
            << grid.generators.size() << "\nstochastic buses " << model.stochastic_count() << "\nbase MVA "
            << csv::format(grid.base_mva) << '\n';
  if (o.dump_model) {
    const fs::path dir = output_dir(o);
    dump_dc_model(model, dir);
    std::ofstream out = open_output(dir / "case_canonical.m");
    write_canonical(grid, out);
  }
  return 0;
}

int cmd_rank(const Options& o) {
  const GridCase grid = read_case(o);
  if (o.n < 1) throw UsageError("--n must be at least 1");
  const ExperimentSetup setup = make_setup(o, grid, build_dc_model(grid));
  const SampleSet data = sample(setup.spec, o.n, o.seed);
  const fs::path dir = output_dir(o);
  for (const ScoreTable& t : rank_all(setup, data)) {
    std::ofstream out = open_output(dir / ("scores_" + std::string(to_string(t.algorithm)) + ".csv"));
    write_score_table_csv(t, out);
    std::cout << to_string(t.algorithm) << " top line " << top_k(t.ranks, 1).front() << '\n';
  }
  if (o.write_samples) {
    std::ofstream out = open_output(dir / "samples.csv");
    write_samples_csv(data, out, setup.model.base_mva);
  }
  std::ostringstream sum;
  sum << std::hex << checksum(data);
  write_manifest(dir, "rank", o, {{"n", std::to_string(o.n)}, {"# sample checksum", sum.str()}});
  return 0;
}

int cmd_ground_truth(const Options& o) {
  const GridCase grid = read_case(o);
  const ExperimentSetup setup = make_setup(o, grid, build_dc_model(grid));
  const TruthSource src = read_truth(o, kind_of(setup.spec));
  const GroundTruth truth = ground_truth(setup.model, setup.spec, setup.gamma, src);
  const fs::path dir = output_dir(o);
  std::ofstream out = open_output(dir / "ground_truth.csv");
  write_ground_truth_csv(truth, out);
  write_manifest(dir, "ground-truth", o,
                 {{"truth", o.truth}, {"n-mc", std::to_string(o.n_mc)}, {"truth-seed", std::to_string(o.truth_seed)}});
  return 0;
}

int cmd_experiment(const Options& o) {
  const GridCase grid = read_case(o);
  if (o.kind != "both" && o.kind != "false-selection" && o.kind != "rank-intervals")
    throw UsageError("--kind must be false-selection, rank-intervals or both");
  if (o.replications < 1) throw UsageError("--replications must be at least 1");
  const ExperimentSetup setup = make_setup(o, grid, build_dc_model(grid));
  const int m = static_cast<int>(setup.model.line_count());

  const auto ks = parse_integers<int>(o.k, "--k"), js = parse_integers<int>(o.j, "--j");
  if (ks.empty() || ks.size() != js.size()) throw UsageError("--k and --j need the same non-zero number of entries");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || js[i] < ks[i] || js[i] > m)
      throw UsageError("need 1 <= k <= j <= " + std::to_string(m) + ", got k=" + std::to_string(ks[i]) +
                       " j=" + std::to_string(js[i]));
    pairs.emplace_back(ks[i], js[i]);
  }
  const std::vector<Eigen::Index> grid_n =
      o.n_grid.empty() ? default_n_grid() : parse_integers<Eigen::Index>(o.n_grid, "--n-grid");
  for (std::size_t i = 0; i < grid_n.size(); ++i)
    if (grid_n[i] < 1 || (i > 0 && grid_n[i] <= grid_n[i - 1]))
      throw UsageError("--n-grid must be positive and strictly increasing");
  if (o.n < 1) throw UsageError("--n must be at least 1");

  const TruthSource src = read_truth(o, kind_of(setup.spec));
  const GroundTruth truth = ground_truth(setup.model, setup.spec, setup.gamma, src);
  const fs::path dir = output_dir(o);
  {
    std::ofstream out = open_output(dir / "ground_truth.csv");
    write_ground_truth_csv(truth, out);
  }
  if (o.kind != "rank-intervals") {
    const auto curves = run_false_selection(setup, truth, pairs, grid_n);
    std::ofstream out = open_output(dir / "false_selection.csv");
    write_false_selection_csv(curves, out);
  }
  if (o.kind != "false-selection") {
    const auto reports = run_rank_intervals(setup, truth, o.n, o.level);
    std::ofstream out = open_output(dir / "rank_intervals.csv");
    write_rank_intervals_csv(reports, out);
  }
  std::string grid_text;
  for (auto v : grid_n) grid_text += (grid_text.empty() ? "" : ",") + std::to_string(v);
  write_manifest(dir, "experiment", o,
                 {{"kind", o.kind},
                  {"k", o.k},
                  {"j", o.j},
                  {"n-grid", grid_text},
                  {"n", std::to_string(o.n)},
                  {"replications", std::to_string(o.replications)},
                  {"level", csv::format(o.level)},
                  {"truth", o.truth},
                  {"n-mc", std::to_string(o.n_mc)},
                  {"truth-seed", std::to_string(o.truth_seed)}});
  return 0;
}

void add_model_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--dist", o.dist, "Injection distribution: gaussian or laplace")->capture_default_str();
  cmd->add_option("--algs", o.algs, "Comma-separated algorithms, 1-4 or alg1-alg4")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed of the injection samples")->capture_default_str();
  cmd->add_option("--cov-seed", o.cov_seed, "Seed of the random off-diagonal covariance")->capture_default_str();
  cmd->add_option("--variance-factor", o.variance_factor, "Injection variance as a multiple of |mu| (MW^2)")
      ->capture_default_str();
  cmd->add_option("--offdiag-variance", o.offdiag_variance, "Variance of the entries of A in A A^T")
      ->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "Laplace scale multiplier")->capture_default_str();
  cmd->add_option("--gamma-mult", o.gamma_mult, "Thresholds as a multiple of |nominal flow| instead of RATE_A");
  cmd->add_option("--gamma-file", o.gamma_file, "CSV line,gamma (MW) with a threshold for every line");
  cmd->add_flag("--no-lp-verify", o.no_lp_verify, "Skip the simplex cross-check of the Laplace rates");
}

void add_truth_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--truth", o.truth, "Ground truth: auto, analytic, ldp or mc")->capture_default_str();
  cmd->add_option("--n-mc", o.n_mc, "Monte Carlo ground-truth sample size")->capture_default_str();
  cmd->add_option("--truth-seed", o.truth_seed, "Seed of the Monte Carlo ground truth")->capture_default_str();
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"Rank transmission lines by overload probability"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", o.config_path, "File of key=value lines using the long option names");

  auto* parse = app.add_subcommand("parse", "Parse and validate a case file, print a summary");
  auto* rank = app.add_subcommand("rank", "Sample injections and write one score table per algorithm");
  auto* experiment = app.add_subcommand("experiment", "False-selection and rank-interval experiments");
  auto* truth = app.add_subcommand("ground-truth", "Write the ground-truth overload probabilities");

  for (auto* cmd : {parse, rank, experiment, truth}) {
    cmd->add_option("--case", o.case_path, "MATPOWER case file");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--config", o.config_path, "File of key=value lines using the long option names");
  }
  parse->add_flag("--dump-model", o.dump_model, "Write the DC model matrices and a canonical case file");

  add_model_options(rank, o);
  rank->add_option("--n", o.n, "Number of observations")->capture_default_str();
  rank->add_flag("--write-samples", o.write_samples, "Also write samples.csv (MW)");

  add_model_options(truth, o);
  add_truth_options(truth, o);

  add_model_options(experiment, o);
  add_truth_options(experiment, o);
  experiment->add_option("--kind", o.kind, "false-selection, rank-intervals or both")->capture_default_str();
  experiment->add_option("--k", o.k, "Comma-separated true top-k sizes")->capture_default_str();
  experiment->add_option("--j", o.j, "Comma-separated estimated top-j sizes, paired with --k")
      ->capture_default_str();
  experiment->add_option("--n-grid", o.n_grid, "Comma-separated increasing sample sizes for false selection");
  experiment->add_option("--n", o.n, "Sample size for rank intervals")->capture_default_str();
  experiment->add_option("--replications", o.replications, "Monte Carlo replications")->capture_default_str();
  experiment->add_option("--level", o.level, "Rank interval level")->capture_default_str();
  experiment->add_option("--threads", o.threads, "Worker threads, 0 for all cores")->capture_default_str();

  std::vector<std::string> args = expand_config(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (parse->parsed()) return cmd_parse(o);
  if (rank->parsed()) return cmd_rank(o);
  if (experiment->parsed()) return cmd_experiment(o);
  return cmd_ground_truth(o);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "linerank: usage error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "linerank: data error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "linerank: data error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "linerank: numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "linerank: " << e.what() << '\n';
    return 1;
  }
}
