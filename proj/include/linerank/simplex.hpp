#pragma once

#include <Eigen/Dense>

namespace linerank {

/// min c^T x  subject to  A x = b,  x >= 0.
struct StandardFormLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's anti-cycling rule. Meant for the small
/// programs in this library (tens of variables), not for general use.
LpSolution solve_lp(const StandardFormLp& lp);

}  // namespace linerank
