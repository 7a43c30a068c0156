#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "clorient/common_lines.hpp"
#include "clorient/rotations.hpp"

// Data layer shared by every solver: the Gram matrix of the first two
// rotation columns, the common-line coefficient matrix, the diagonal-block
// constraint map and its adjoint, the dual coupling matrix for per-pair
// directions, and the two spectral proximal operators. All of it is plain
// dense Eigen; functions take expressions and return concrete matrices.

namespace clorient {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-pair 2D dual directions, one column per (i, j) pair in pair_index order.
using DualDirections = Eigen::Matrix2Xd;

namespace detail {

template <typename Derived>
void require_square_even(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw std::invalid_argument(std::string(who) + ": expected a square 2K x 2K matrix");
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(who) + ": matrix is not square");
  using Scalar = typename Derived::Scalar;
  const DenseMatrix<Scalar> eval = m;
  const double scale = 1.0 + static_cast<double>(eval.cwiseAbs().maxCoeff());
  if (static_cast<double>((eval - eval.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// Gram matrix of the first two columns of each rotation:
/// block (i, j) is R_i^{[1,2]T} R_j^{[1,2]}. Rank 3, PSD, identity diagonal.
inline Eigen::MatrixXd gram_from_rotations(const RotationList& rotations) {
  const int k = static_cast<int>(rotations.size());
  Eigen::MatrixXd r(3, 2 * k);
  for (int i = 0; i < k; ++i) r.middleCols<2>(2 * i) = rotations[i].leftCols<2>();
  return r.transpose() * r;
}

/// 2K x 2K coefficient matrix with blocks S_ij = c_ij c_ji^T placed
/// symmetrically and zero diagonal blocks; every block has rank one and unit
/// spectral norm. The orientation makes <G_ij, S_ij> the inner product of the
/// two lifted common-line directions, so that
/// sum_{i!=j} w_ij <R_i (c_ij,0)^T, R_j (c_ji,0)^T> == trace((W o S) G).
inline Eigen::MatrixXd common_line_matrix(const CommonLineSet& cls) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * cls.k, 2 * cls.k);
  for (const auto& p : cls.pairs) {
    const Eigen::Matrix2d block = p.c_ij * p.c_ji.transpose();
    s.block<2, 2>(2 * p.i, 2 * p.j) = block;
    s.block<2, 2>(2 * p.j, 2 * p.i) = block.transpose();
  }
  return s;
}

/// Expands K x K pair weights to 2 x 2 blocks and Hadamard-multiplies into s.
inline Eigen::MatrixXd weighted_coefficients(const Eigen::MatrixXd& s,
                                             const Eigen::MatrixXd& w) {
  detail::require_square_even(s, "weighted_coefficients");
  const int k = static_cast<int>(w.rows());
  if (w.cols() != k || 2 * k != s.rows())
    throw std::invalid_argument("weighted_coefficients: weight matrix must be K x K");
  Eigen::MatrixXd c(2 * k, 2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) c.block<2, 2>(2 * i, 2 * j) = w(i, j) * s.block<2, 2>(2 * i, 2 * j);
  return c;
}

/// The 3K diagonal-block functionals of a 2K x 2K matrix: per image,
/// (g_ii^11, g_ii^22, (g_ii^12 + g_ii^21)/sqrt(2)).
template <typename Derived>
DenseVector<typename Derived::Scalar> constraint_map(const Eigen::MatrixBase<Derived>& g) {
  detail::require_square_even(g, "constraint_map");
  using Scalar = typename Derived::Scalar;
  const int k = static_cast<int>(g.rows() / 2);
  const Scalar half_sqrt2 = Scalar(std::sqrt(2.0) / 2.0);
  DenseVector<Scalar> out(3 * k);
  for (int i = 0; i < k; ++i) {
    out(3 * i + 0) = g(2 * i, 2 * i);
    out(3 * i + 1) = g(2 * i + 1, 2 * i + 1);
    out(3 * i + 2) = half_sqrt2 * (g(2 * i, 2 * i + 1) + g(2 * i + 1, 2 * i));
  }
  return out;
}

/// Adjoint of constraint_map: block-diagonal with blocks
/// [[y1, y3/sqrt(2)], [y3/sqrt(2), y2]]. Satisfies map(adjoint(y)) == y.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> constraint_adjoint(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  if (y.cols() != 1 || y.rows() % 3 != 0)
    throw std::invalid_argument("constraint_adjoint: expected a 3K vector");
  const int k = static_cast<int>(y.rows() / 3);
  const Scalar inv_sqrt2 = Scalar(1.0 / std::sqrt(2.0));
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(2 * k, 2 * k);
  for (int i = 0; i < k; ++i) {
    out(2 * i, 2 * i) = y(3 * i + 0);
    out(2 * i + 1, 2 * i + 1) = y(3 * i + 1);
    out(2 * i, 2 * i + 1) = out(2 * i + 1, 2 * i) = inv_sqrt2 * y(3 * i + 2);
  }
  return out;
}

/// Right-hand side of the identity-diagonal-block constraint: (1, 1, 0) per image.
inline Eigen::VectorXd constraint_rhs(int k) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * k);
  for (int i = 0; i < k; ++i) b(3 * i) = b(3 * i + 1) = 1.0;
  return b;
}

/// Couples per-pair dual directions into Gram space: block (i, j), i < j, is
/// theta_ij c_ji^T / 2 with the transpose mirrored at (j, i), so that
/// <coupling(theta), G> == sum_{i<j} <theta_ij, G_ij c_ji>.
inline Eigen::MatrixXd theta_coupling_matrix(const DualDirections& theta,
                                             const CommonLineSet& cls) {
  if (theta.cols() != static_cast<Eigen::Index>(cls.pairs.size()))
    throw std::invalid_argument("theta_coupling_matrix: one column per pair required");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * cls.k, 2 * cls.k);
  for (std::size_t p = 0; p < cls.pairs.size(); ++p) {
    const auto& pair = cls.pairs[p];
    const Eigen::Matrix2d block = 0.5 * theta.col(p) * pair.c_ji.transpose();
    q.block<2, 2>(2 * pair.i, 2 * pair.j) = block;
    q.block<2, 2>(2 * pair.j, 2 * pair.i) = block.transpose();
  }
  return q;
}

/// Euclidean projection onto the PSD cone: eigenvalues clipped at zero.
/// Input must already be symmetric; symmetrize upstream.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived>& m) {
  detail::require_symmetric(m, "project_psd");
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(m);
  DenseVector<Scalar> clipped = eig.eigenvalues().cwiseMax(Scalar(0));
  DenseMatrix<Scalar> out =
      eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return ((out + out.transpose()) / Scalar(2)).eval();
}

/// Spectral soft-thresholding: eigenvalues shrunk toward zero by tau with
/// eigenvectors kept; the proximal operator of tau * (nuclear norm).
template <typename Derived>
DenseMatrix<typename Derived::Scalar> soft_threshold_spectrum(
    const Eigen::MatrixBase<Derived>& m, double tau) {
  detail::require_symmetric(m, "soft_threshold_spectrum");
  if (tau < 0.0) throw std::invalid_argument("soft_threshold_spectrum: tau must be >= 0");
  using Scalar = typename Derived::Scalar;
  if (tau == 0.0) {
    DenseMatrix<Scalar> out = m;
    return ((out + out.transpose()) / Scalar(2)).eval();
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(m);
  DenseVector<Scalar> shrunk = eig.eigenvalues();
  for (Eigen::Index i = 0; i < shrunk.size(); ++i) {
    const Scalar magnitude = std::abs(shrunk(i)) - Scalar(tau);
    shrunk(i) = magnitude > Scalar(0) ? (shrunk(i) > Scalar(0) ? magnitude : -magnitude)
                                      : Scalar(0);
  }
  DenseMatrix<Scalar> out =
      eig.eigenvectors() * shrunk.asDiagonal() * eig.eigenvectors().transpose();
  return ((out + out.transpose()) / Scalar(2)).eval();
}

/// Largest absolute eigenvalue of a symmetric matrix.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  detail::require_symmetric(m, "spectral_norm");
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(m.derived(), Eigen::EigenvaluesOnly);
  return std::max(std::abs(static_cast<double>(eig.eigenvalues().minCoeff())),
                  std::abs(static_cast<double>(eig.eigenvalues().maxCoeff())));
}

/// Unsquared-deviation objective sum_{i<j} ||c_ij - G_ij c_ji||.
inline double lud_objective(const Eigen::MatrixXd& g, const CommonLineSet& cls) {
  detail::require_square_even(g, "lud_objective");
  double total = 0.0;
  for (const auto& p : cls.pairs)
    total += (p.c_ij - g.block<2, 2>(2 * p.i, 2 * p.j) * p.c_ji).norm();
  return total;
}

/// Per-pair smoothed residual sqrt(max(0, 2 - 2<G_ij, S_ij>) + eps^2); the same
/// value for (i, j) and (j, i).
inline double smoothed_residual(const Eigen::MatrixXd& g, const Eigen::MatrixXd& s, int i,
                                int j, double epsilon) {
  const double inner = g.block<2, 2>(2 * i, 2 * j).cwiseProduct(s.block<2, 2>(2 * i, 2 * j)).sum();
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * inner) + epsilon * epsilon);
}

/// Smoothed deviation objective sum_{i != j} r_ij^p with the residuals above.
/// p = 1 is the least-unsquared-deviations surrogate; p < 1 penalizes
/// outliers harder.
inline double smoothed_objective(const Eigen::MatrixXd& g, const Eigen::MatrixXd& s,
                                 double epsilon, double p = 1.0) {
  detail::require_square_even(g, "smoothed_objective");
  const int k = static_cast<int>(g.rows() / 2);
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      total += std::pow(smoothed_residual(g, s, i, j, epsilon), p);
    }
  return total;
}

/// Feasibility check for a solved Gram matrix: symmetric, identity 2 x 2
/// diagonal blocks within tol, smallest eigenvalue >= -tol.
inline bool is_feasible_gram(const Eigen::MatrixXd& g, double tol) {
  detail::require_square_even(g, "is_feasible_gram");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()))
    return false;
  const int k = static_cast<int>(g.rows() / 2);
  for (int i = 0; i < k; ++i)
    if ((g.block<2, 2>(2 * i, 2 * i) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > tol)
      return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace clorient
