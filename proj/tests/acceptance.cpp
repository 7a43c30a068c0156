// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Thresholds are fixed here, not tuned at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "clorient/gram.hpp"
#include "clorient/rounding.hpp"
#include "clorient/rotations.hpp"
#include "clorient/simulate.hpp"
#include "clorient/solvers.hpp"
#include "oracles.hpp"

using namespace clorient;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::MatrixXd unit_weights(int k) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(k, k);
  w.diagonal().setZero();
  return w;
}

double rounded_mse(const RotationList& truth, const SolveReport& rep, std::uint64_t seed) {
  return register_and_mse(truth, round_gram(rep.gram, {seed, false})).mse;
}

// Rotations concentrated around the identity; their true Gram matrix has a
// spectral norm close to K, which makes the spectral bound active.
RotationList clustered_rotations(int k, double spread_rad, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, spread_rad);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  RotationList out;
  for (int i = 0; i < k; ++i) {
    Eigen::Vector3d axis(unif(rng), unif(rng), unif(rng));
    while (axis.norm() < 1e-3) axis = {unif(rng), unif(rng), unif(rng)};
    out.emplace_back(Eigen::AngleAxisd(gauss(rng), axis.normalized()).toRotationMatrix());
  }
  return out;
}

// -------------------------------------------------------------------------

bool exact_recovery(std::string& detail) {
  const int k = 20;
  const auto truth = sample_uniform_rotations(k, 101);
  const auto cls = corrupt(truth, {1.0, 0.0, 360, 101});
  bool ok = true;
  char buf[160];

  SolverConfig cfg;
  cfg.tol_primal = 1e-7;
  cfg.tol_dual = 1e-7;
  cfg.max_admm_iters = 20000;

  const auto check = [&](const char* name, const SolveReport& rep) {
    const double mse = rounded_mse(truth, rep, 101);
    const auto spectrum = spectrum_report(rep.gram);
    const bool pass = mse <= 1e-3 && spectrum.rank3_gap <= 1e-2;
    std::snprintf(buf, sizeof(buf), "%s mse=%.2e gap=%.2e ", name, mse, spectrum.rank3_gap);
    detail += buf;
    ok = ok && pass;
  };

  check("ls_sdr", ls_sdr(cls, unit_weights(k), cfg));
  check("lud", admm_lud(cls, cfg));
  SolverConfig irls_cfg = cfg;
  irls_cfg.epsilon = 1e-3;
  check("irls", irls(cls, irls_cfg));
  return ok;
}

bool operator_identities(std::string& detail) {
  const int k = 8;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  double worst_adjoint = 0.0, worst_inverse = 0.0, worst_trace = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd m(2 * k, 2 * k);
    for (int r = 0; r < 2 * k; ++r)
      for (int c = 0; c < 2 * k; ++c) m(r, c) = gauss(rng);
    m = (0.5 * (m + m.transpose())).eval();
    Eigen::VectorXd y(3 * k);
    for (int i = 0; i < 3 * k; ++i) y(i) = gauss(rng);

    worst_adjoint = std::max(worst_adjoint,
                             std::abs(constraint_map(m).dot(y) -
                                      m.cwiseProduct(constraint_adjoint(y)).sum()));
    worst_inverse = std::max(
        worst_inverse, (constraint_map(constraint_adjoint(y)) - y).cwiseAbs().maxCoeff());

    const auto truth = sample_uniform_rotations(k, 1000 + trial);
    const auto cls = exact_common_lines(truth);
    const auto g = gram_from_rotations(truth);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) w(i, j) = w(j, i) = std::abs(gauss(rng));
    double direct = 0.0;
    for (const auto& p : cls.pairs) {
      const Eigen::Vector3d u = truth[p.i].leftCols<2>() * p.c_ij;
      const Eigen::Vector3d v = truth[p.j].leftCols<2>() * p.c_ji;
      direct += 2.0 * w(p.i, p.j) * u.dot(v);
    }
    const double trace = (weighted_coefficients(common_line_matrix(cls), w) * g).trace();
    worst_trace = std::max(worst_trace, std::abs(direct - trace));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "adjoint=%.1e map.adjoint=%.1e trace=%.1e", worst_adjoint,
                worst_inverse, worst_trace);
  detail = buf;
  return worst_adjoint <= 1e-10 && worst_inverse <= 1e-10 && worst_trace <= 1e-10;
}

bool subproblem_oracles(std::string& detail) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lam(-5.0, 5.0);
  std::uniform_real_distribution<double> tau(0.0, 3.0);
  double worst_scalar = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double l = lam(rng);
    const double t = tau(rng);
    const double closed = std::abs(l) > t ? l - (l > 0 ? t : -t) : 0.0;
    // refining 1D grid search on tau*|z| + (z-lambda)^2/2
    double lo = -std::abs(l) - 2.0 * t - 1.0, hi = std::abs(l) + 2.0 * t + 1.0, best = 0.0;
    for (int pass = 0; pass < 6; ++pass) {
      const int ngrid = 2000;
      const double step = (hi - lo) / ngrid;
      double best_val = std::numeric_limits<double>::infinity();
      for (int i = 0; i <= ngrid; ++i) {
        const double z = lo + step * i;
        const double val = t * std::abs(z) + 0.5 * (z - l) * (z - l);
        if (val < best_val) {
          best_val = val;
          best = z;
        }
      }
      lo = best - step;
      hi = best + step;
    }
    worst_scalar = std::max(worst_scalar, std::abs(closed - best));
  }

  double worst_psd = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd m = oracles::random_symmetric(8, rng, 2.0);
    // independent eigen-clipping oracle (hand-rolled Jacobi sweep)
    worst_psd = std::max(worst_psd, (project_psd(m) - oracles::psd_projection(m)).norm());
  }
  char buf[100];
  std::snprintf(buf, sizeof(buf), "scalar=%.1e psd=%.1e", worst_scalar, worst_psd);
  detail = buf;
  return worst_scalar <= 1e-6 && worst_psd <= 1e-10;
}

bool irls_descent(std::string& detail) {
  bool ok = true;
  double worst = -1.0;
  for (double exponent : {0.9, 0.5}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto truth = sample_uniform_rotations(40, 300 + seed);
      const auto cls = corrupt(truth, {0.5, 2.0, 360, 300 + seed});
      SolverConfig cfg;
      cfg.p = exponent;
      const auto rep = irls(cls, cfg);
      for (std::size_t i = 1; i < rep.irls_objective_history.size(); ++i) {
        const double step = rep.irls_objective_history[i] - rep.irls_objective_history[i - 1];
        worst = std::max(worst, step);
        ok = ok && step <= 1e-6;
      }
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "worst increase=%.2e", worst);
  detail = buf;
  return ok;
}

bool smoothing_bound(std::string& detail) {
  const int k = 20;
  double worst_rel = 0.0;
  bool ok = true;
  for (double eps : {1e-2, 1e-3}) {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const auto truth = sample_uniform_rotations(k, 400 + trial);
      const auto g = gram_from_rotations(truth);
      const auto cls = corrupt(truth, {0.5, 4.0, 360, 400 + trial});
      const auto s = common_line_matrix(cls);
      const double gap = smoothed_objective(g, s, eps) - smoothed_objective(g, s, 0.0);
      // smoothed_objective with eps=0 is F(G); bound is 4 K^2 eps
      ok = ok && gap >= 0.0 && gap < 4.0 * k * k * eps;
      worst_rel = std::max(worst_rel, gap / (4.0 * k * k * eps));
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "worst gap / bound = %.3f", worst_rel);
  detail = buf;
  return ok;
}

bool robustness_ordering(std::string& detail) {
  const int k = 60;
  std::vector<double> ls_mse, lud_mse;
  int lud_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto truth = sample_uniform_rotations(k, seed);
    const auto cls = corrupt(truth, {0.5, 2.0, 360, seed});
    SolverConfig cfg;
    const double ls = rounded_mse(truth, ls_sdr(cls, unit_weights(k), cfg), seed);
    const double lud = rounded_mse(truth, admm_lud(cls, cfg), seed);
    ls_mse.push_back(ls);
    lud_mse.push_back(lud);
    if (lud < ls) ++lud_wins;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "median lud=%.3f ls=%.3f pairwise lud wins %d/10",
                median(lud_mse), median(ls_mse), lud_wins);
  detail = buf;
  return median(lud_mse) < median(ls_mse) && lud_wins >= 8;
}

bool spectral_constraint(std::string& detail) {
  // uniform truths: ||G_true||_2 / K in [0.60, 0.74] at K = 500
  const auto uniform = sample_uniform_rotations(500, 500);
  const double alpha_true = spectral_norm(gram_from_rotations(uniform)) / 500.0;

  // clustered truths make the bound active; every returned G must obey it
  const int k = 30;
  const auto truth = clustered_rotations(k, 0.25, 501);
  const double alpha_unconstrained =
      spectral_norm(gram_from_rotations(truth)) / static_cast<double>(k);
  const auto cls = corrupt(truth, {0.9, 1.0, 360, 501});
  SolverConfig cfg;
  cfg.alpha = 0.75;
  const double ls_norm = spectral_norm(ls_sdr(cls, unit_weights(k), cfg).gram);
  const double lud_norm = spectral_norm(admm_lud(cls, cfg).gram);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "alpha_true(K=500)=%.3f cluster alpha=%.2f ls=%.4fK lud=%.4fK", alpha_true,
                alpha_unconstrained, ls_norm / k, lud_norm / k);
  detail = buf;
  const double bound = 0.75 * k * (1.0 + 1e-4);
  return alpha_true >= 0.60 && alpha_true <= 0.74 && alpha_unconstrained > 0.80 &&
         ls_norm <= bound && lud_norm <= bound;
}

bool dual_feasibility(std::string& detail) {
  const int k = 20;
  const auto truth = sample_uniform_rotations(k, 101);
  const auto cls = corrupt(truth, {1.0, 0.0, 360, 101});
  SolverConfig cfg;
  cfg.alpha = 0.75;
  cfg.tol_primal = 1e-7;
  cfg.tol_dual = 1e-7;
  cfg.max_admm_iters = 20000;
  const Eigen::MatrixXd c = weighted_coefficients(common_line_matrix(cls), unit_weights(k));
  const auto rep = admm_ls(c, cfg);

  const double dual_residual =
      (c + rep.dual_x + constraint_adjoint(rep.dual_y) - rep.dual_z).norm() / (1.0 + c.norm());
  const double primal_value = -c.cwiseProduct(rep.gram).sum();
  // nuclear norm of the dual variable Z
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rep.dual_z, Eigen::EigenvaluesOnly);
  const double z_nuclear = eig.eigenvalues().cwiseAbs().sum();
  const double dual_value = rep.dual_y.dot(constraint_rhs(k)) - 0.75 * k * z_nuclear;

  char buf[140];
  std::snprintf(buf, sizeof(buf), "dual res=%.1e primal=%.6f dual=%.6f", dual_residual,
                primal_value, dual_value);
  detail = buf;
  return dual_residual <= 1e-4 &&
         dual_value <= primal_value + 1e-3 * (1.0 + std::abs(primal_value));
}

bool detection_rates(std::string& detail) {
  const auto truth = sample_uniform_rotations(100, 900);
  bool ok = true;
  char buf[60];
  for (double p : {0.64, 0.44, 0.23}) {
    const auto cls = corrupt(truth, {p, 2.0, 360, 900});
    const double rate = measure_detection_rate(truth, cls, 10.0);
    std::snprintf(buf, sizeof(buf), "p=%.2f rate=%.3f ", p, rate);
    detail += buf;
    ok = ok && std::abs(rate - p) <= 0.05;
  }
  return ok;
}

bool collapse_surfacing(std::string& detail) {
  const int k = 60;
  const std::uint64_t seed = 2;
  const auto truth = sample_uniform_rotations(k, seed);
  const auto cls = corrupt(truth, {0.15, 2.0, 360, seed});

  SolverConfig cfg;
  bool unconstrained_ok = false;
  std::string tag;
  try {
    const auto rep = irls(cls, cfg);
    const double alpha_hat = spectrum_report(rep.gram).alpha_hat;
    char buf[60];
    std::snprintf(buf, sizeof(buf), "no-alpha: alpha_hat=%.3f ", alpha_hat);
    tag += buf;
    try {
      round_gram(rep.gram, {seed, false});
      unconstrained_ok = alpha_hat >= 0.9;  // converged and clustered
    } catch (const DegenerateRoundingError&) {
      tag += "(degenerate rounding) ";
      unconstrained_ok = true;
    }
  } catch (const DivergenceError&) {
    tag += "no-alpha diverged ";
  }

  SolverConfig constrained = cfg;
  constrained.alpha = 0.67;
  const auto rep = irls(cls, constrained);
  const double alpha_hat = spectrum_report(rep.gram).alpha_hat;
  char buf[60];
  std::snprintf(buf, sizeof(buf), "alpha=0.67: alpha_hat=%.3f", alpha_hat);
  tag += buf;
  detail = tag;
  return unconstrained_ok && alpha_hat <= 0.8;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "exact recovery (ls_sdr, lud-admm, irls)", exact_recovery},
      {2, "operator and trace identities", operator_identities},
      {3, "subproblem oracles (shrinkage, PSD projection)", subproblem_oracles},
      {4, "IRLS descent, p in {0.9, 0.5}", irls_descent},
      {5, "smoothing bound 4K^2*eps", smoothing_bound},
      {6, "robustness ordering lud-admm vs ls at K=60", robustness_ordering},
      {7, "spectral constraint honored; uniform norm near 2K/3", spectral_constraint},
      {8, "dual feasibility and weak duality", dual_feasibility},
      {9, "detection-rate emulation 64/44/23%", detection_rates},
      {10, "collapse surfacing with and without alpha", collapse_surfacing},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = criterion.run(detail);
    } catch (const std::exception& e) {
      detail += std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", criterion.id,
                criterion.name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
