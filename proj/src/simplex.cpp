#include "linerank/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "linerank/errors.hpp"

namespace linerank {
namespace {

constexpr double kTol = 1e-11;
constexpr int kMaxPivots = 50000;

class Tableau {
public:
  Tableau(const StandardFormLp& lp) : rows_(lp.a.rows()), vars_(lp.a.cols()) {
    t_ = Eigen::MatrixXd::Zero(rows_ + 1, vars_ + rows_ + 1);
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const double sign = lp.b(r) < 0 ? -1.0 : 1.0;
      t_.block(r + 1, 0, 1, vars_) = sign * lp.a.row(r);
      t_(r + 1, vars_ + r) = 1.0;
      t_(r + 1, rhs()) = sign * lp.b(r);
      basis_[static_cast<std::size_t>(r)] = vars_ + r;
    }
  }

  // Phase 1: minimise the sum of artificials. Returns the optimal infeasibility.
  double phase_one() {
    t_.row(0).setZero();
    for (Eigen::Index r = 0; r < rows_; ++r) {
      t_.block(0, 0, 1, vars_) -= t_.block(r + 1, 0, 1, vars_);
      t_(0, rhs()) -= t_(r + 1, rhs());
    }
    if (!iterate(vars_ + rows_)) throw NumericError("phase one of the simplex cannot be unbounded");
    return -t_(0, rhs());
  }

  // Pivots remaining artificials out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < vars_) continue;
      for (Eigen::Index j = 0; j < vars_; ++j)
        if (std::abs(t_(r + 1, j)) > kTol) {
          pivot(r, j);
          break;
        }
    }
  }

  // Phase 2 on the original objective. Returns false when unbounded.
  bool phase_two(const Eigen::VectorXd& c) {
    t_.row(0).setZero();
    t_.block(0, 0, 1, vars_) = c.transpose();
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const Eigen::Index bj = basis_[static_cast<std::size_t>(r)];
      if (bj < vars_) t_.row(0) -= c(bj) * t_.row(r + 1);
    }
    return iterate(vars_);
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(vars_);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const Eigen::Index bj = basis_[static_cast<std::size_t>(r)];
      if (bj < vars_) x(bj) = t_(r + 1, rhs());
    }
    return x;
  }

private:
  Eigen::Index rhs() const { return vars_ + rows_; }

  // Bland's rule over columns [0, allowed). Returns false if unbounded.
  bool iterate(Eigen::Index allowed) {
    for (int count = 0; count < kMaxPivots; ++count) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j)
        if (t_(0, j) < -kTol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows_; ++r) {
        const double coef = t_(r + 1, enter);
        if (coef <= kTol) continue;
        const double ratio = t_(r + 1, rhs()) / coef;
        if (ratio < best - kTol ||
            (ratio <= best + kTol && leave >= 0 &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw NumericError("simplex pivot limit exceeded");
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r + 1) /= t_(r + 1, j);
    for (Eigen::Index i = 0; i <= rows_; ++i)
      if (i != r + 1 && t_(i, j) != 0.0) t_.row(i) -= t_(i, j) * t_.row(r + 1);
    basis_[static_cast<std::size_t>(r)] = j;
  }

  Eigen::Index rows_, vars_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution solve_lp(const StandardFormLp& lp) {
  if (lp.a.rows() != lp.b.size() || lp.a.cols() != lp.c.size())
    throw DomainError("inconsistent LP dimensions");

  Tableau tab(lp);
  const double scale = std::max(1.0, lp.b.cwiseAbs().sum());
  if (tab.phase_one() > 1e-9 * scale) return {LpStatus::infeasible, {}, 0.0};
  tab.expel_artificials();
  if (!tab.phase_two(lp.c)) return {LpStatus::unbounded, {}, -std::numeric_limits<double>::infinity()};

  LpSolution out;
  out.status = LpStatus::optimal;
  out.x = tab.solution();
  out.objective = lp.c.dot(out.x);
  return out;
}

}  // namespace linerank
