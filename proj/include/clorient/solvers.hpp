#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "clorient/common_lines.hpp"
#include "clorient/gram.hpp"

namespace clorient {

/// Knobs shared by every solver. alpha absent means no spectral-norm bound.
struct SolverConfig {
  double mu = 1.0;                   // augmented-Lagrangian penalty
  double gamma = 1.618;              // multiplier step, in (0, (1+sqrt(5))/2)
  std::optional<double> alpha;       // spectral bound ||G||_2 <= alpha*K, in [2/3, 1)
  double epsilon = 1e-3;             // IRLS smoothing
  int n_irls = 10;                   // IRLS outer iterations
  int max_admm_iters = 5000;
  double tol_primal = 1e-5;          // relative ||A(G) - b||
  double tol_dual = 1e-5;            // relative dual-constraint residual
  double p = 1.0;                    // deviation exponent, in (0, 1]
  std::uint64_t seed = 0;
};

void validate(const SolverConfig& cfg);

/// Everything a solve leaves behind. Residual histories are per ADMM
/// iteration (for IRLS: of the last inner solve); the IRLS fields are per
/// outer iteration.
struct SolveReport {
  Eigen::MatrixXd gram;
  std::vector<double> objective_history;
  std::vector<double> primal_residual_history;
  std::vector<double> dual_residual_history;
  std::vector<double> theta_norm_history;      // LUD only: max ||theta_ij|| per iteration
  std::vector<double> irls_residuals;          // r^k = sum of smoothed residuals
  std::vector<double> irls_objective_history;  // smoothed objective F(G^k, eps) (exponent p)
  int iterations = 0;                          // ADMM iterations (total, for IRLS)
  int outer_iterations = 0;                    // IRLS outer count, 0 otherwise
  double wall_time_seconds = 0.0;
  bool converged = false;
  // Final dual state, for feasibility and duality diagnostics.
  Eigen::VectorXd dual_y;
  Eigen::MatrixXd dual_z;
  Eigen::MatrixXd dual_x;
};

/// ADMM for the spectral-norm-constrained weighted LS relaxation
///   min -<C, G>  s.t.  A(G) = b,  G PSD,  ||G||_2 <= alpha*K,
/// run on the dual. Requires cfg.alpha; objective_history records <C, G>.
SolveReport admm_ls(const Eigen::MatrixXd& c, const SolverConfig& cfg);

/// ADMM for the least-unsquared-deviations relaxation
///   min sum_{i<j} ||c_ij - G_ij c_ji||  s.t.  A(G) = b,  G PSD,
/// with the spectral bound added when cfg.alpha is present.
/// objective_history records the unsquared-deviation objective.
SolveReport admm_lud(const CommonLineSet& cls, const SolverConfig& cfg);

/// Weighted LS relaxation max <W o S, G> s.t. A(G) = b, G PSD, with the
/// spectral bound when cfg.alpha is present. weights is K x K, symmetric,
/// nonnegative, zero diagonal.
SolveReport ls_sdr(const CommonLineSet& cls, const Eigen::MatrixXd& weights,
                   const SolverConfig& cfg);

/// Iteratively reweighted least squares for the smoothed deviation objective:
/// repeatedly solves the weighted LS relaxation with weights r_ij^(p-2),
/// warm-starting each inner solve from the previous Gram matrix.
SolveReport irls(const CommonLineSet& cls, const SolverConfig& cfg);

namespace detail {

/// Full ADMM state for warm starts across IRLS outer iterations.
struct AdmmWarmStart {
  Eigen::MatrixXd g;
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;
  Eigen::VectorXd y;
};

/// Shared dual-ADMM engine for the linear-objective relaxation with
/// coefficient matrix c. warm_start may be null.
SolveReport admm_gram_engine(const Eigen::MatrixXd& c, const SolverConfig& cfg,
                             const AdmmWarmStart* warm_start);

}  // namespace detail

}  // namespace clorient
