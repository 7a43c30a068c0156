#include "clorient/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace clorient {

namespace {

constexpr double kDivergenceGuard = 1e6;
constexpr double kMuMin = 1e-4;
constexpr double kMuMax = 1e4;
constexpr int kMuCheckEvery = 25;
constexpr int kStagnationWindow = 50;
constexpr double kStagnationTol = 1e-7;

double golden_ratio() { return 0.5 * (1.0 + std::sqrt(5.0)); }

void symmetrize(Eigen::MatrixXd& m) { m = ((m + m.transpose()) / 2.0).eval(); }

// Returned Gram matrices are symmetrized and their diagonal blocks snapped to
// the identity; the change is bounded by the feasibility tolerance reached.
void enforce_feasible_form(Eigen::MatrixXd& g) {
  symmetrize(g);
  const int k = static_cast<int>(g.rows() / 2);
  for (int i = 0; i < k; ++i) g.block<2, 2>(2 * i, 2 * i) = Eigen::Matrix2d::Identity();
}

// Penalty update, checked every kMuCheckEvery iterations. The multiplier G
// enters the subproblems only through G/mu, so rescaling mu needs no state
// correction.
void adapt_mu(double primal, double dual, double& mu) {
  if (primal > 10.0 * dual)
    mu = std::max(mu / 2.0, kMuMin);
  else if (dual > 10.0 * primal)
    mu = std::min(mu * 2.0, kMuMax);
}

void check_divergence(double primal, double dual, int iter) {
  if (!std::isfinite(primal) || !std::isfinite(dual) || primal > kDivergenceGuard ||
      dual > kDivergenceGuard)
    throw DivergenceError("ADMM diverged at iteration " + std::to_string(iter) +
                          " (primal " + std::to_string(primal) + ", dual " +
                          std::to_string(dual) + ")");
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("SolverConfig: mu must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < golden_ratio()))
    throw std::invalid_argument("SolverConfig: gamma must lie in (0, (1+sqrt(5))/2)");
  if (cfg.alpha && !(*cfg.alpha >= 2.0 / 3.0 && *cfg.alpha < 1.0))
    throw std::invalid_argument("SolverConfig: alpha must lie in [2/3, 1), got " +
                                std::to_string(*cfg.alpha));
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
  if (cfg.n_irls < 1) throw std::invalid_argument("SolverConfig: n_irls must be >= 1");
  if (cfg.max_admm_iters < 1)
    throw std::invalid_argument("SolverConfig: max_admm_iters must be >= 1");
  if (!(cfg.tol_primal > 0.0 && cfg.tol_dual > 0.0))
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  if (!(cfg.p > 0.0 && cfg.p <= 1.0))
    throw std::invalid_argument("SolverConfig: deviation exponent p must lie in (0, 1]");
}

namespace detail {

// Dual ADMM for  min -<C, G>  s.t. A(G) = b, G PSD [, ||G||_2 <= alpha*K].
//
// With the spectral bound, the dual reads
//   min -y^T b + alpha*K*||Z||_*  s.t.  Z = C + X + A*(y), X PSD,
// and the Z block is the spectral soft-thresholding prox. Without the bound
// the nuclear term turns into the hard constraint C + X + A*(y) = 0, i.e.
// the same scheme with Z pinned at zero.
SolveReport admm_gram_engine(const Eigen::MatrixXd& c, const SolverConfig& cfg,
                             const AdmmWarmStart* warm_start) {
  validate(cfg);
  clorient::detail::require_square_even(c, "admm_gram_engine");
  clorient::detail::require_symmetric(c, "admm_gram_engine");
  if (!c.allFinite()) throw std::invalid_argument("admm_gram_engine: C has non-finite entries");

  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(c.rows());
  const int k = n / 2;
  const bool spectral = cfg.alpha.has_value();
  const double c_norm = c.norm();
  const Eigen::VectorXd b = constraint_rhs(k);
  const double b_norm = b.norm();

  double mu = cfg.mu;
  Eigen::MatrixXd g = warm_start ? warm_start->g : Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd x = warm_start ? warm_start->x : Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd z = warm_start ? warm_start->z : Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd y = warm_start ? warm_start->y : Eigen::VectorXd::Zero(3 * k);

  SolveReport rep;
  for (int iter = 0; iter < cfg.max_admm_iters; ++iter) {
    y = -constraint_map(c + x - z) - (constraint_map(g) - b) / mu;
    const Eigen::MatrixXd ay = constraint_adjoint(y);
    if (spectral) {
      const Eigen::MatrixXd bk = c + x + ay + g / mu;
      z = soft_threshold_spectrum(bk, *cfg.alpha * k / mu);
    }
    Eigen::MatrixXd h = z - c - ay - g / mu;
    symmetrize(h);
    x = project_psd(h);
    g = (1.0 - cfg.gamma) * g + cfg.gamma * mu * (x - h);

    const double primal = (constraint_map(g) - b).norm() / (1.0 + b_norm);
    const double dual = (c + x + ay - z).norm() / (1.0 + c_norm);
    rep.primal_residual_history.push_back(primal);
    rep.dual_residual_history.push_back(dual);
    rep.objective_history.push_back(c.cwiseProduct(g).sum());
    rep.iterations = iter + 1;
    check_divergence(primal, dual, iter);

    if (primal <= cfg.tol_primal && dual <= cfg.tol_dual) {
      rep.converged = true;
      break;
    }
    if ((iter + 1) % kMuCheckEvery == 0) adapt_mu(primal, dual, mu);
  }

  enforce_feasible_form(g);
  rep.gram = std::move(g);
  rep.dual_y = std::move(y);
  rep.dual_z = std::move(z);
  rep.dual_x = std::move(x);
  rep.wall_time_seconds = seconds_since(t0);
  return rep;
}

}  // namespace detail

SolveReport admm_ls(const Eigen::MatrixXd& c, const SolverConfig& cfg) {
  if (!cfg.alpha)
    throw std::invalid_argument(
        "admm_ls: requires the spectral bound cfg.alpha; use ls_sdr for the unconstrained "
        "relaxation");
  return detail::admm_gram_engine(c, cfg, nullptr);
}

SolveReport ls_sdr(const CommonLineSet& cls, const Eigen::MatrixXd& weights,
                   const SolverConfig& cfg) {
  validate(cls);
  const int k = cls.k;
  if (weights.rows() != k || weights.cols() != k)
    throw std::invalid_argument("ls_sdr: weights must be K x K");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * (1.0 + weights.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("ls_sdr: weights must be symmetric");
  if (weights.minCoeff() < 0.0)
    throw std::invalid_argument("ls_sdr: weights must be nonnegative");
  if (weights.diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("ls_sdr: weight diagonal must be zero");
  const Eigen::MatrixXd c = weighted_coefficients(common_line_matrix(cls), weights);
  return detail::admm_gram_engine(c, cfg, nullptr);
}

SolveReport admm_lud(const CommonLineSet& cls, const SolverConfig& cfg) {
  validate(cfg);
  validate(cls);
  const auto t0 = std::chrono::steady_clock::now();
  const int k = cls.k;
  const int n = 2 * k;
  const auto n_pairs = static_cast<Eigen::Index>(cls.pairs.size());
  const bool spectral = cfg.alpha.has_value();
  const Eigen::VectorXd b = constraint_rhs(k);
  const double b_norm = b.norm();

  double mu = cfg.mu;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * k);
  DualDirections theta = DualDirections::Zero(2, n_pairs);

  SolveReport rep;
  for (int iter = 0; iter < cfg.max_admm_iters; ++iter) {
    Eigen::MatrixXd coupling = theta_coupling_matrix(theta, cls);
    y = -constraint_map(coupling + x - z) - (constraint_map(g) - b) / mu;
    const Eigen::MatrixXd ay = constraint_adjoint(y);

    // Per-pair dual directions: exact block minimizer of the augmented
    // Lagrangian over the unit ball. The coupling matrix carries a 1/2 on
    // each of its two mirrored blocks, which doubles the unconstrained
    // minimizer relative to a single-block reading.
    const Eigen::MatrixXd phi = x + ay - z + g / mu;
    for (Eigen::Index p = 0; p < n_pairs; ++p) {
      const auto& pair = cls.pairs[p];
      Eigen::Vector2d t =
          2.0 * (pair.c_ij / mu - phi.block<2, 2>(2 * pair.i, 2 * pair.j) * pair.c_ji);
      const double norm = t.norm();
      if (norm > 1.0) t /= norm;
      theta.col(p) = t;
    }
    coupling = theta_coupling_matrix(theta, cls);

    if (spectral) {
      const Eigen::MatrixXd bk = coupling + x + ay + g / mu;
      z = soft_threshold_spectrum(bk, *cfg.alpha * k / mu);
    }
    Eigen::MatrixXd h = z - coupling - ay - g / mu;
    symmetrize(h);
    x = project_psd(h);
    g = (1.0 - cfg.gamma) * g + cfg.gamma * mu * (x - h);

    const double primal = (constraint_map(g) - b).norm() / (1.0 + b_norm);
    const double dual = (coupling + x + ay - z).norm() / (1.0 + coupling.norm());
    const double objective = lud_objective(g, cls);
    rep.primal_residual_history.push_back(primal);
    rep.dual_residual_history.push_back(dual);
    rep.objective_history.push_back(objective);
    rep.theta_norm_history.push_back(theta.colwise().norm().maxCoeff());
    rep.iterations = iter + 1;
    check_divergence(primal, dual, iter);

    // Feasibility alone can dip below tolerance while the dual directions are
    // still moving; require the unsquared-deviation objective to have
    // flattened as well.
    const bool stagnated =
        iter >= kStagnationWindow &&
        std::abs(objective - rep.objective_history[iter - kStagnationWindow]) <
            kStagnationTol * (1.0 + std::abs(objective));
    if (primal <= cfg.tol_primal && dual <= cfg.tol_dual && stagnated) {
      rep.converged = true;
      break;
    }
    if ((iter + 1) % kMuCheckEvery == 0) adapt_mu(primal, dual, mu);
  }

  enforce_feasible_form(g);
  rep.gram = std::move(g);
  rep.dual_y = std::move(y);
  rep.dual_z = std::move(z);
  rep.dual_x = std::move(x);
  rep.wall_time_seconds = seconds_since(t0);
  return rep;
}

SolveReport irls(const CommonLineSet& cls, const SolverConfig& cfg) {
  validate(cfg);
  validate(cls);
  const auto t0 = std::chrono::steady_clock::now();
  const int k = cls.k;
  const Eigen::MatrixXd s = common_line_matrix(cls);

  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(k, k);
  w.diagonal().setZero();

  SolveReport rep;
  detail::AdmmWarmStart warm;
  Eigen::MatrixXd incumbent;
  int total_iters = 0;
  for (int outer = 0; outer < cfg.n_irls; ++outer) {
    const Eigen::MatrixXd c = weighted_coefficients(s, w);
    SolveReport inner = detail::admm_gram_engine(c, cfg, outer == 0 ? nullptr : &warm);
    total_iters += inner.iterations;
    // Warm-start the next inner solve from the full dual state, not just the
    // Gram iterate; near stationarity the solver then resumes instead of
    // re-converging from scratch.
    warm = {inner.gram, inner.dual_x, inner.dual_z, inner.dual_y};

    // Monotone safeguard: the descent argument needs the inner solve to not
    // degrade the weighted objective relative to the incumbent. Solver
    // tolerance can violate that by a hair; keep the incumbent then.
    if (outer == 0 || c.cwiseProduct(inner.gram).sum() >= c.cwiseProduct(incumbent).sum())
      incumbent = inner.gram;

    // The residual is the same for (i, j) and (j, i); assign both entries
    // from one evaluation so the reweighted coefficients stay exactly
    // symmetric.
    double residual_sum = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        const double r = smoothed_residual(incumbent, s, i, j, cfg.epsilon);
        w(i, j) = w(j, i) = std::pow(r, cfg.p - 2.0);
        residual_sum += 2.0 * r;
      }
    rep.irls_residuals.push_back(residual_sum);
    rep.irls_objective_history.push_back(smoothed_objective(incumbent, s, cfg.epsilon, cfg.p));

    // Keep the last inner solve's trace as the report's iteration-level view.
    rep.objective_history = std::move(inner.objective_history);
    rep.primal_residual_history = std::move(inner.primal_residual_history);
    rep.dual_residual_history = std::move(inner.dual_residual_history);
    rep.converged = inner.converged;
    rep.dual_y = std::move(inner.dual_y);
    rep.dual_z = std::move(inner.dual_z);
    rep.dual_x = std::move(inner.dual_x);
  }
  rep.gram = std::move(incumbent);
  rep.iterations = total_iters;
  rep.outer_iterations = cfg.n_irls;
  rep.wall_time_seconds = seconds_since(t0);
  return rep;
}

}  // namespace clorient
