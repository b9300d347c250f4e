#include "linerank/dc_model.hpp"

#include <fstream>
#include <string>
#include <utility>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"
#include "linerank/laplacian.hpp"

namespace linerank {

DcModel build_dc_model(const GridCase& grid) {
  validate(grid);
  const auto pos = bus_positions(grid);
  const auto b = static_cast<Eigen::Index>(grid.bus_count());
  const auto m = static_cast<Eigen::Index>(grid.branch_count());

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Eigen::VectorXd beta(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const Branch& br = grid.branches[static_cast<std::size_t>(l)];
    edges.emplace_back(pos.at(br.from_bus), pos.at(br.to_bus));
    beta(l) = susceptance(br);
  }

  DcModel model;
  model.base_mva = grid.base_mva;
  model.incidence = incidence_matrix<double>(b, edges);
  model.susceptance_diag = beta.asDiagonal();
  model.laplacian = weighted_laplacian(model.incidence, beta);
  model.laplacian_pinv = pinv_laplacian(model.laplacian);
  model.ptdf = model.susceptance_diag * model.incidence * model.laplacian_pinv;

  // Net injection per bus (MW): generation minus demand.
  Eigen::VectorXd injection(b);
  for (Eigen::Index i = 0; i < b; ++i) injection(i) = -grid.buses[static_cast<std::size_t>(i)].demand;
  for (const Generator& g : grid.generators) injection(static_cast<Eigen::Index>(pos.at(g.bus))) += g.nominal_output;
  injection /= grid.base_mva;

  for (std::size_t i = 0; i < grid.buses.size(); ++i)
    (grid.buses[i].is_stochastic ? model.stochastic_buses : model.deterministic_buses).push_back(i);

  const auto d = static_cast<Eigen::Index>(model.stochastic_buses.size());
  const auto nd = static_cast<Eigen::Index>(model.deterministic_buses.size());
  model.v_s.resize(m, d);
  model.nominal_stochastic.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto col = static_cast<Eigen::Index>(model.stochastic_buses[static_cast<std::size_t>(k)]);
    model.v_s.col(k) = model.ptdf.col(col);
    model.nominal_stochastic(k) = injection(col);
  }
  model.v_d.resize(m, nd);
  model.det_injections.resize(nd);
  for (Eigen::Index k = 0; k < nd; ++k) {
    const auto col = static_cast<Eigen::Index>(model.deterministic_buses[static_cast<std::size_t>(k)]);
    model.v_d.col(k) = model.ptdf.col(col);
    model.det_injections(k) = injection(col);
  }
  model.deterministic_flows = model.v_d * model.det_injections;
  model.nominal_flows = model.v_s * model.nominal_stochastic + model.deterministic_flows;
  return model;
}

Eigen::VectorXd flows(const DcModel& model, const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != model.stochastic_count())
    throw DomainError("injection vector has length " + std::to_string(p.size()) + ", expected " +
                      std::to_string(model.stochastic_count()));
  return model.v_s * p + model.deterministic_flows;
}

Eigen::MatrixXd flow_samples(const DcModel& model, const Eigen::Ref<const Eigen::MatrixXd>& injections) {
  if (injections.cols() != model.stochastic_count())
    throw DomainError("injection samples have " + std::to_string(injections.cols()) +
                      " columns, expected " + std::to_string(model.stochastic_count()));
  Eigen::MatrixXd f = injections * model.v_s.transpose();
  f.rowwise() += model.deterministic_flows.transpose();
  return f;
}

namespace {

void write_matrix(const std::filesystem::path& file, const Eigen::MatrixXd& mat) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file.string() + "'");
  out << "row,col,value\n";
  for (Eigen::Index r = 0; r < mat.rows(); ++r)
    for (Eigen::Index c = 0; c < mat.cols(); ++c)
      out << r + 1 << ',' << c + 1 << ',' << csv::format(mat(r, c)) << '\n';
}

}  // namespace

void dump_dc_model(const DcModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "incidence.csv", model.incidence);
  write_matrix(dir / "laplacian.csv", model.laplacian);
  write_matrix(dir / "laplacian_pinv.csv", model.laplacian_pinv);
  write_matrix(dir / "ptdf.csv", model.ptdf);
  write_matrix(dir / "nominal_flows.csv", Eigen::MatrixXd(model.nominal_flows * model.base_mva));
}

}  // namespace linerank
