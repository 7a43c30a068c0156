#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "clorient/errors.hpp"
#include "clorient/gram.hpp"
#include "clorient/rotations.hpp"

namespace clorient {

struct RoundingConfig {
  std::uint64_t seed = 0;
  // Project onto the top-3 eigenvector basis instead of a random 3-frame;
  // diagnostic alternative to the default randomized projection.
  bool use_eigenvector_basis = false;
};

/// Nearest rotation whose first two columns approximate the given 3 x 2
/// block: SVD snap onto orthonormal pairs, third column by cross product
/// (which fixes det = +1). Throws DegenerateRoundingError when the block is
/// rank deficient; image_index is only used for the error message.
inline Eigen::Matrix3d snap_to_rotation(const Eigen::Matrix<double, 3, 2>& a,
                                        int image_index = -1) {
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(
      a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-10)
    throw DegenerateRoundingError(
        image_index, "rounding: projected block for image " + std::to_string(image_index) +
                         " is rank deficient (sigma_2 = " +
                         std::to_string(svd.singularValues()(1)) + ")");
  const Eigen::Matrix<double, 3, 2> pair =
      svd.matrixU().leftCols<2>() * svd.matrixV().transpose();
  Eigen::Matrix3d r;
  r.leftCols<2>() = pair;
  r.col(2) = pair.col(0).cross(pair.col(1));
  return r;
}

namespace detail {

// Uniform draw from the Stiefel manifold of orthonormal 3-frames in R^rows:
// thin QR of a Gaussian matrix with the R-diagonal sign fix.
inline Eigen::MatrixXd random_stiefel_3(int rows, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(rows, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = gauss(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, 3);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
  for (int c = 0; c < 3; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

}  // namespace detail

/// Recovers rotations from a solved Gram matrix.
///
/// Draws a random 3-frame P, projects onto the subspace spanned by G P (or
/// the top-3 eigenvectors when configured) and factors the compressed Gram
/// matrix there: with Q an orthonormal basis of the subspace, the 3 x 2K
/// factor sqrt(Q^T G Q) Q^T reproduces G on the subspace, so for a rank-3 G
/// its per-image 3 x 2 blocks are exactly the first two rotation columns up
/// to one global orthogonal transform. Each block is snapped to the nearest
/// rotation. Deterministic per seed. Requires feasible diagonal blocks
/// (identity within 1e-4).
inline RotationList round_gram(const Eigen::MatrixXd& g, const RoundingConfig& cfg = {}) {
  detail::require_square_even(g, "round_gram");
  const int k = static_cast<int>(g.rows() / 2);
  for (int i = 0; i < k; ++i)
    if ((g.block<2, 2>(2 * i, 2 * i) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-4)
      throw std::invalid_argument("round_gram: diagonal block " + std::to_string(i) +
                                  " is not the identity within 1e-4");

  Eigen::MatrixXd basis;
  if (cfg.use_eigenvector_basis) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    basis = eig.eigenvectors().rightCols<3>();  // top three eigenvalues
  } else {
    std::mt19937_64 rng(cfg.seed);
    basis = g * detail::random_stiefel_3(2 * k, rng);
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q3 = qr.householderQ() * Eigen::MatrixXd::Identity(2 * k, 3);
  const Eigen::Matrix3d compressed = q3.transpose() * g * q3;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(compressed);
  const Eigen::Matrix3d root = es.eigenvectors() *
                               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               es.eigenvectors().transpose();
  const Eigen::MatrixXd factor = root * q3.transpose();  // 3 x 2K

  RotationList out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.push_back(snap_to_rotation(factor.middleCols<2>(2 * i), i));
  return out;
}

/// Spectrum diagnostics of a solved Gram matrix: eigenvalues in descending
/// order, the rank-3 tightness ratio lambda_4 / lambda_3, and the clustering
/// score lambda_1 / K (about 2/3 for uniformly spread orientations, near 1
/// for collapsed ones).
struct SpectrumReport {
  Eigen::VectorXd eigenvalues;
  double rank3_gap = 0.0;
  double alpha_hat = 0.0;
};

inline SpectrumReport spectrum_report(const Eigen::MatrixXd& g) {
  detail::require_square_even(g, "spectrum_report");
  const int k = static_cast<int>(g.rows() / 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  SpectrumReport rep;
  rep.eigenvalues = eig.eigenvalues().reverse();
  rep.rank3_gap = rep.eigenvalues.size() >= 4 ? rep.eigenvalues(3) / rep.eigenvalues(2)
                                              : 0.0;
  rep.alpha_hat = rep.eigenvalues(0) / static_cast<double>(k);
  return rep;
}

}  // namespace clorient
