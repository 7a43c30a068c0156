#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "clorient/common_lines.hpp"
#include "clorient/rotations.hpp"

namespace clorient {

/// Corruption regime for simulated common-line detection. Each pair is an
/// inlier with probability inlier_rate (true directions plus wrapped-Gaussian
/// angular noise, snapped to the n_theta grid); otherwise both directions are
/// redrawn uniformly on the grid.
struct CorruptionModel {
  double inlier_rate = 1.0;
  double inlier_sigma_deg = 0.0;
  int n_theta = 360;
  std::uint64_t seed = 0;
};

inline void validate(const CorruptionModel& m) {
  if (!(m.inlier_rate > 0.0 && m.inlier_rate <= 1.0))
    throw std::invalid_argument("CorruptionModel: inlier_rate must be in (0, 1], got " +
                                std::to_string(m.inlier_rate));
  if (!(m.inlier_sigma_deg >= 0.0))
    throw std::invalid_argument("CorruptionModel: inlier_sigma_deg must be >= 0");
  if (m.n_theta < 4 || m.n_theta % 2 != 0)
    throw std::invalid_argument("CorruptionModel: n_theta must be even and >= 4, got " +
                                std::to_string(m.n_theta));
}

namespace detail {

inline Eigen::Vector2d unit_from_grid(int m, int n_theta) {
  const double angle = 2.0 * std::numbers::pi * m / n_theta;
  return {std::cos(angle), std::sin(angle)};
}

inline int snap_angle(double angle, int n_theta) {
  const double step = 2.0 * std::numbers::pi / n_theta;
  const long long m = std::llround(angle / step);
  return static_cast<int>(((m % n_theta) + n_theta) % n_theta);
}

}  // namespace detail

/// Noise-free common lines for every pair, kept at full precision (no grid
/// snapping); n_theta is recorded for bookkeeping only.
inline CommonLineSet exact_common_lines(const RotationList& truth, int n_theta = 360) {
  const int k = static_cast<int>(truth.size());
  CommonLineSet cls{k, n_theta, {}};
  cls.pairs.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      auto [c_ij, c_ji] = true_common_line(truth[i], truth[j]);
      cls.pairs.push_back({i, j, c_ij, c_ji, false});
    }
  return cls;
}

/// Simulated detections: per-pair Bernoulli inlier/outlier draw, wrapped
/// Gaussian noise on inlier angles, grid snapping. Deterministic per seed.
inline CommonLineSet corrupt(const RotationList& truth, const CorruptionModel& model) {
  validate(model);
  const int k = static_cast<int>(truth.size());
  if (k < 3) throw std::invalid_argument("corrupt: need K >= 3 rotations");

  std::mt19937_64 rng(model.seed);
  std::bernoulli_distribution keep(model.inlier_rate);
  std::normal_distribution<double> noise(0.0, model.inlier_sigma_deg * std::numbers::pi / 180.0);
  std::uniform_int_distribution<int> grid(0, model.n_theta - 1);

  CommonLineSet cls{k, model.n_theta, {}};
  cls.pairs.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      CommonLinePair pair;
      pair.i = i;
      pair.j = j;
      if (keep(rng)) {
        auto [c_ij, c_ji] = true_common_line(truth[i], truth[j]);
        const double a_ij = std::atan2(c_ij.y(), c_ij.x()) + noise(rng);
        const double a_ji = std::atan2(c_ji.y(), c_ji.x()) + noise(rng);
        pair.c_ij = detail::unit_from_grid(detail::snap_angle(a_ij, model.n_theta), model.n_theta);
        pair.c_ji = detail::unit_from_grid(detail::snap_angle(a_ji, model.n_theta), model.n_theta);
        pair.is_outlier = false;
      } else {
        pair.c_ij = detail::unit_from_grid(grid(rng), model.n_theta);
        pair.c_ji = detail::unit_from_grid(grid(rng), model.n_theta);
        pair.is_outlier = true;
      }
      cls.pairs.push_back(pair);
    }
  return cls;
}

/// Fraction of pairs whose lifted 3D directions agree within threshold_deg.
/// The chord ||R_i (c_ij,0)^T - R_j (c_ji,0)^T|| converts to an angle via
/// 2*asin(chord/2).
inline double measure_detection_rate(const RotationList& truth, const CommonLineSet& cls,
                                     double threshold_deg) {
  if (static_cast<int>(truth.size()) != cls.k)
    throw std::invalid_argument("measure_detection_rate: K mismatch, " +
                                std::to_string(truth.size()) + " rotations vs K=" +
                                std::to_string(cls.k));
  if (cls.pairs.empty()) return 0.0;
  const double threshold_rad = threshold_deg * std::numbers::pi / 180.0;
  std::size_t hits = 0;
  for (const auto& p : cls.pairs) {
    Eigen::Vector3d u = truth[p.i].leftCols<2>() * p.c_ij;
    Eigen::Vector3d v = truth[p.j].leftCols<2>() * p.c_ji;
    const double chord = (u - v).norm();
    const double angle = 2.0 * std::asin(std::min(1.0, chord / 2.0));
    if (angle < threshold_rad) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cls.pairs.size());
}

}  // namespace clorient
