#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clorient/errors.hpp"

namespace clorient {

using RotationList = std::vector<Eigen::Matrix3d>;

/// diag(1, 1, -1). Conjugating every rotation by it flips the handedness of
/// the whole set; common-line data cannot distinguish the two sets.
inline Eigen::Matrix3d handedness_reflection() {
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
  j(2, 2) = -1.0;
  return j;
}

inline bool is_rotation(const Eigen::Matrix3d& m, double tol = 1e-12) {
  return (m.transpose() * m - Eigen::Matrix3d::Identity()).norm() <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

/// One Haar-uniform rotation: QR of a Gaussian matrix, R-diagonal sign fix,
/// then a column flip if the determinant came out -1.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3d a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = gauss(rng);
  const Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 3; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  if (q.determinant() < 0.0) q.col(2) = -q.col(2);
  return q;
}

/// K Haar-uniform rotations, deterministic per seed. Requires K >= 3.
inline RotationList sample_uniform_rotations(int k, std::uint64_t seed) {
  if (k < 3)
    throw std::invalid_argument("sample_uniform_rotations: need K >= 3, got " +
                                std::to_string(k));
  std::mt19937_64 rng(seed);
  RotationList out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(random_rotation(rng));
  return out;
}

/// Below this angle (radians) between viewing directions the common line is
/// numerically meaningless and true_common_line refuses to produce one.
inline constexpr double kParallelViewTolerance = 1e-6;

/// In-plane directions of the intersection line of two Fourier planes.
///
/// The 3D intersection is oriented along normalize(r_i.col(2) x r_j.col(2)),
/// a fixed global sign convention; the returned vectors are its coordinates
/// in the first two columns of r_i and r_j respectively, so that
/// r_i * (c_ij, 0)^T == r_j * (c_ji, 0)^T.
inline std::pair<Eigen::Vector2d, Eigen::Vector2d> true_common_line(
    const Eigen::Matrix3d& r_i, const Eigen::Matrix3d& r_j) {
  const Eigen::Vector3d vi = r_i.col(2);
  const Eigen::Vector3d vj = r_j.col(2);
  const Eigen::Vector3d cross = vi.cross(vj);
  // sin(angle) between the viewing directions; near 0 for both parallel and
  // antiparallel views, which share a whole plane rather than one line.
  if (cross.norm() < std::sin(kParallelViewTolerance))
    throw DegenerateGeometryError(
        "true_common_line: viewing directions are (anti)parallel within tolerance");
  const Eigen::Vector3d d = cross.normalized();
  Eigen::Vector2d c_ij(r_i.col(0).dot(d), r_i.col(1).dot(d));
  Eigen::Vector2d c_ji(r_j.col(0).dot(d), r_j.col(1).dot(d));
  c_ij.normalize();
  c_ji.normalize();
  return {c_ij, c_ji};
}

/// Result of registering an estimated rotation set against a reference.
struct RegistrationResult {
  double mse = 0.0;
  RotationList aligned;                 // alignment * (winning-branch estimates)
  Eigen::Matrix3d alignment = Eigen::Matrix3d::Identity();
  bool reflected = false;               // true if the J-conjugated branch won
};

namespace detail {

// argmax_{O in SO(3)} trace(O * m)
inline Eigen::Matrix3d so3_procrustes(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d d(1.0, 1.0, (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return v * d.asDiagonal() * u.transpose();
}

}  // namespace detail

/// Registered mean squared error between rotation sets.
///
/// Searches the global rotation (orthogonal Procrustes over SO(3)) and both
/// handedness branches {R_hat} and {J R_hat J}, returning the better branch.
/// The MSE is (1/K) sum_i ||truth_i - O * est_i||_F^2 and lies in [0, 12].
inline RegistrationResult register_and_mse(const RotationList& truth,
                                           const RotationList& estimate) {
  if (truth.size() != estimate.size())
    throw std::invalid_argument("register_and_mse: size mismatch, " +
                                std::to_string(truth.size()) + " vs " +
                                std::to_string(estimate.size()));
  if (truth.empty()) throw std::invalid_argument("register_and_mse: empty sets");
  const double k = static_cast<double>(truth.size());
  const Eigen::Matrix3d j = handedness_reflection();

  RegistrationResult best;
  best.mse = std::numeric_limits<double>::infinity();
  for (int branch = 0; branch < 2; ++branch) {
    RotationList est = estimate;
    if (branch == 1)
      for (auto& r : est) r = j * r * j;
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < est.size(); ++i) m += est[i] * truth[i].transpose();
    m /= k;
    const Eigen::Matrix3d o = detail::so3_procrustes(m);
    double mse = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) mse += (truth[i] - o * est[i]).squaredNorm();
    mse /= k;
    if (mse < best.mse) {
      best.mse = mse;
      best.alignment = o;
      best.reflected = (branch == 1);
      best.aligned.clear();
      best.aligned.reserve(est.size());
      for (const auto& r : est) best.aligned.push_back(o * r);
    }
  }
  return best;
}

}  // namespace clorient
