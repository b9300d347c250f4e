#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "linerank/errors.hpp"

namespace linerank {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Edge-vertex incidence matrix: row l has +1 at the tail and -1 at the head of edge l.
template <typename Scalar = double>
DenseMatrix<Scalar> incidence_matrix(Eigen::Index nodes,
                                     std::span<const std::pair<std::size_t, std::size_t>> edges) {
  DenseMatrix<Scalar> c = DenseMatrix<Scalar>::Zero(static_cast<Eigen::Index>(edges.size()), nodes);
  for (std::size_t l = 0; l < edges.size(); ++l) {
    c(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(edges[l].first)) = Scalar(1);
    c(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(edges[l].second)) = Scalar(-1);
  }
  return c;
}

/// L = C^T diag(w) C.
template <typename DerivedC, typename DerivedW>
DenseMatrix<typename DerivedC::Scalar> weighted_laplacian(const Eigen::MatrixBase<DerivedC>& incidence,
                                                          const Eigen::MatrixBase<DerivedW>& weights) {
  return incidence.transpose() * weights.asDiagonal() * incidence;
}

/// Moore-Penrose pseudoinverse of a connected-graph Laplacian via symmetric eigendecomposition.
/// Eigenvalues below b * eps * lambda_max count as zero; exactly one is allowed (the constant
/// vector). Anything else throws ModelError.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> pinv_laplacian(const Eigen::MatrixBase<Derived>& laplacian) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index b = laplacian.rows();
  if (b == 0 || laplacian.cols() != b) throw DomainError("Laplacian must be a non-empty square matrix");

  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(laplacian.derived());
  if (eig.info() != Eigen::Success) throw ModelError("eigendecomposition of the Laplacian failed");

  const auto& values = eig.eigenvalues();
  const Scalar lambda_max = values.cwiseAbs().maxCoeff();
  const Scalar tol = Scalar(b) * std::numeric_limits<Scalar>::epsilon() * lambda_max;

  DenseVector<Scalar> inv = DenseVector<Scalar>::Zero(b);
  Eigen::Index zeros = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    if (std::abs(values(i)) <= tol) ++zeros;
    else inv(i) = Scalar(1) / values(i);
  }
  if (zeros != 1)
    throw ModelError("Laplacian has " + std::to_string(zeros) +
                     " zero eigenvalues; expected exactly one (connected network)");

  const auto& u = eig.eigenvectors();
  DenseMatrix<Scalar> pinv = u * inv.asDiagonal() * u.transpose();
  return (pinv + pinv.transpose()) / Scalar(2);
}

}  // namespace linerank
