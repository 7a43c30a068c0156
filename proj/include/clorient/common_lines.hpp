#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clorient {

/// Measured common-line directions between images i and j (i < j).
/// c_ij lives on image i's Fourier plane, c_ji on image j's; both are unit
/// 2-vectors. is_outlier is simulation bookkeeping and never read by solvers.
struct CommonLinePair {
  int i = 0;
  int j = 0;
  Eigen::Vector2d c_ij = Eigen::Vector2d::UnitX();
  Eigen::Vector2d c_ji = Eigen::Vector2d::UnitX();
  bool is_outlier = false;
};

/// All K(K-1)/2 pairwise common lines, in lexicographic (i, j) order.
struct CommonLineSet {
  int k = 0;
  int n_theta = 360;
  std::vector<CommonLinePair> pairs;
};

/// Position of pair (i, j), i < j, in the lexicographic pair ordering.
inline std::size_t pair_index(int i, int j, int k) {
  return static_cast<std::size_t>(i) * k - static_cast<std::size_t>(i) * (i + 1) / 2 +
         (j - i - 1);
}

inline void validate(const CommonLineSet& cls) {
  const std::size_t expected = static_cast<std::size_t>(cls.k) * (cls.k - 1) / 2;
  if (cls.k < 3)
    throw std::invalid_argument("CommonLineSet: need K >= 3, got " + std::to_string(cls.k));
  if (cls.pairs.size() != expected)
    throw std::invalid_argument("CommonLineSet: expected " + std::to_string(expected) +
                                " pairs, got " + std::to_string(cls.pairs.size()));
  for (const auto& p : cls.pairs) {
    if (p.i < 0 || p.j >= cls.k || p.i >= p.j)
      throw std::invalid_argument("CommonLineSet: bad pair indices (" + std::to_string(p.i) +
                                  ", " + std::to_string(p.j) + ")");
    if (std::abs(p.c_ij.norm() - 1.0) > 1e-12 || std::abs(p.c_ji.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("CommonLineSet: common-line directions must be unit vectors");
  }
}

}  // namespace clorient
