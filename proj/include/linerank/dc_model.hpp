#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "linerank/case_io.hpp"

namespace linerank {

/// Linearised (DC) power-flow map of a network.
///
/// Flows are F = V_s P + V_d a, where P are the injections at stochastic buses and a the
/// fixed injections at deterministic buses. All power quantities are per-unit.
struct DcModel {
  Eigen::MatrixXd incidence;                                // C, m x b
  Eigen::DiagonalMatrix<double, Eigen::Dynamic> susceptance_diag;  // B, m x m
  Eigen::MatrixXd laplacian;                                // L = C^T B C
  Eigen::MatrixXd laplacian_pinv;                           // L^+
  Eigen::MatrixXd ptdf;                                     // V = B C L^+, m x b
  Eigen::MatrixXd v_s;                                      // columns of V at stochastic buses
  Eigen::MatrixXd v_d;                                      // columns of V at deterministic buses
  Eigen::VectorXd det_injections;                           // a
  Eigen::VectorXd nominal_stochastic;                       // mu
  Eigen::VectorXd nominal_flows;                            // nu = V_s mu + V_d a
  Eigen::VectorXd deterministic_flows;                      // V_d a
  std::vector<std::size_t> stochastic_buses;                // positions into GridCase::buses
  std::vector<std::size_t> deterministic_buses;
  double base_mva = 100.0;

  Eigen::Index line_count() const { return ptdf.rows(); }
  Eigen::Index bus_count() const { return ptdf.cols(); }
  Eigen::Index stochastic_count() const { return v_s.cols(); }
};

/// Builds the model. Generators on the same bus are summed; injections are converted to
/// per-unit with the case base MVA.
DcModel build_dc_model(const GridCase& grid);

/// F = V_s p + V_d a for one stochastic injection vector p (per-unit).
Eigen::VectorXd flows(const DcModel& model, const Eigen::Ref<const Eigen::VectorXd>& p);

/// Row-wise flows for an n x d matrix of injections; returns n x m.
Eigen::MatrixXd flow_samples(const DcModel& model, const Eigen::Ref<const Eigen::MatrixXd>& injections);

/// Writes incidence.csv, laplacian.csv, laplacian_pinv.csv, ptdf.csv and nominal_flows.csv
/// (row,col,value; 1-based indices; flows in MW) into dir.
void dump_dc_model(const DcModel& model, const std::filesystem::path& dir);

}  // namespace linerank
