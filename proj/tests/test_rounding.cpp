#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "clorient/gram.hpp"
#include "clorient/rounding.hpp"
#include "clorient/rotations.hpp"

using namespace clorient;

TEST_CASE("exact rank-3 Gram matrices round back to the truth") {
  const auto truth = sample_uniform_rotations(15, 1);
  const auto g = gram_from_rotations(truth);

  for (const bool eigen_basis : {false, true}) {
    RoundingConfig cfg;
    cfg.seed = 3;
    cfg.use_eigenvector_basis = eigen_basis;
    const auto estimate = round_gram(g, cfg);
    REQUIRE(estimate.size() == truth.size());
    for (const auto& r : estimate) CHECK(is_rotation(r, 1e-10));
    CHECK(register_and_mse(truth, estimate).mse <= 1e-10);
  }
}

TEST_CASE("rounding is deterministic per seed and seed-independent on rank-3 input") {
  const auto truth = sample_uniform_rotations(10, 4);
  const auto g = gram_from_rotations(truth);

  const auto a = round_gram(g, {5, false});
  const auto b = round_gram(g, {5, false});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);

  const auto c = round_gram(g, {6, false});
  CHECK(register_and_mse(a, c).mse <= 1e-10);  // same subspace, different frame
}

TEST_CASE("rounding an uninformative Gram still yields valid rotations") {
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(20, 20);
  const auto estimate = round_gram(g, {7, false});
  REQUIRE(estimate.size() == 10);
  for (const auto& r : estimate) CHECK(is_rotation(r, 1e-10));
  const auto again = round_gram(g, {7, false});
  for (std::size_t i = 0; i < estimate.size(); ++i) CHECK((estimate[i] - again[i]).norm() == 0.0);
}

TEST_CASE("rounding is equivariant under a global rotation of the truth") {
  const auto truth = sample_uniform_rotations(8, 8);
  std::mt19937_64 rng(9);
  const Eigen::Matrix3d q = random_rotation(rng);
  RotationList rotated;
  for (const auto& r : truth) rotated.push_back(q * r);
  // same Gram matrix, so the same rounded set registers against both
  const auto g = gram_from_rotations(truth);
  CHECK((g - gram_from_rotations(rotated)).norm() <= 1e-12);
  const auto estimate = round_gram(g, {10, false});
  CHECK(register_and_mse(truth, estimate).mse <= 1e-10);
  CHECK(register_and_mse(rotated, estimate).mse <= 1e-10);
}

TEST_CASE("per-block snap is Frobenius-optimal against random orthonormal pairs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix<double, 3, 2> a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) a(r, c) = gauss(rng);
    const Eigen::Matrix3d snapped = snap_to_rotation(a);
    const double best = (a - snapped.leftCols<2>()).norm();
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::Matrix<double, 3, 2> s;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) s(r, c) = gauss(rng);
      const Eigen::HouseholderQR<Eigen::Matrix<double, 3, 2>> qr(s);
      const Eigen::Matrix<double, 3, 2> stiefel =
          qr.householderQ() * Eigen::Matrix<double, 3, 2>::Identity();
      CHECK(best <= (a - stiefel).norm() + 1e-12);
    }
  }
}

TEST_CASE("rank-deficient blocks are refused with the image index") {
  Eigen::Matrix<double, 3, 2> a;
  a.col(0) = Eigen::Vector3d(1, 2, 3);
  a.col(1) = 2.0 * a.col(0);
  try {
    snap_to_rotation(a, 4);
    FAIL("expected DegenerateRoundingError");
  } catch (const DegenerateRoundingError& e) {
    CHECK(e.image_index == 4);
  }
}

TEST_CASE("infeasible diagonal blocks are rejected up front") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(8, 8);
  g(0, 0) = 1.5;
  CHECK_THROWS_AS(round_gram(g, {0, false}), std::invalid_argument);
}

TEST_CASE("spectrum report diagnostics") {
  SUBCASE("rank-3 exact input") {
    const auto g = gram_from_rotations(sample_uniform_rotations(12, 13));
    const auto rep = spectrum_report(g);
    CHECK(rep.eigenvalues.size() == 24);
    CHECK(rep.rank3_gap <= 1e-10);
    CHECK(rep.eigenvalues(0) >= rep.eigenvalues(1));
  }

  SUBCASE("identical rotations cluster completely") {
    const auto one = sample_uniform_rotations(3, 14);
    const auto rep = spectrum_report(gram_from_rotations(RotationList(25, one[0])));
    CHECK(rep.alpha_hat == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("uniform rotations spread to about two thirds") {
    const auto rep = spectrum_report(gram_from_rotations(sample_uniform_rotations(500, 15)));
    CHECK(rep.alpha_hat >= 0.60);
    CHECK(rep.alpha_hat <= 0.74);
  }
}
