// clorient: estimate rotations from pairwise common-line measurements.
//
// Subcommands: simulate (generate corrupted datasets), solve (run one method
// on a dataset), sweep (grid of methods x alphas x inlier rates x seeds),
// report (aggregate a results CSV).
//
// Exit codes: 0 success, 2 validation, 3 solver failure, 4 I/O.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "clorient/experiment.hpp"
#include "clorient/io.hpp"

namespace {

struct CliOptions {
  clorient::ExperimentSpec spec;
  double alpha = -1.0;  // < 0 means absent
  std::string config;
  std::string dataset;
  std::string grid;
  std::string results;
};

void add_solver_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--alpha", opt.alpha,
                  "spectral bound ||G||_2 <= alpha*K, in [2/3, 1); omit for none");
  cmd->add_option("--mu", opt.spec.solver.mu, "ADMM penalty parameter");
  cmd->add_option("--gamma", opt.spec.solver.gamma, "multiplier step length");
  cmd->add_option("--epsilon", opt.spec.solver.epsilon, "IRLS smoothing parameter");
  cmd->add_option("--n-irls", opt.spec.solver.n_irls, "IRLS outer iterations");
  cmd->add_option("--max-iters", opt.spec.solver.max_admm_iters, "ADMM iteration budget");
  cmd->add_option("--tol-primal", opt.spec.solver.tol_primal, "primal feasibility tolerance");
  cmd->add_option("--tol-dual", opt.spec.solver.tol_dual, "dual feasibility tolerance");
  cmd->add_option("--p", opt.spec.solver.p, "deviation exponent in (0, 1]");
}

// Fills spec fields from a key = value file; explicit command-line flags win.
void apply_config(const CLI::App* cmd, CliOptions& opt) {
  if (opt.config.empty()) return;
  const auto kv = clorient::io::read_key_values(opt.config);
  const auto given = [&](const std::string& flag) {
    const auto* option = cmd->get_option_no_throw(flag);
    return option != nullptr && option->count() > 0;
  };
  const auto want = [&](const std::string& key, const std::string& flag) {
    return kv.count(key) > 0 && !given(flag);
  };
  static const std::set<std::string> known = {
      "k",       "trials", "inlier_rate", "sigma_deg",      "n_theta",    "seed",
      "method",  "alpha",  "mu",          "gamma",          "epsilon",    "n_irls",
      "p",       "out",    "dataset",     "max_admm_iters", "tol_primal", "tol_dual"};
  for (const auto& [key, value] : kv)
    if (!known.contains(key))
      throw std::invalid_argument("unknown config key '" + key + "' in " + opt.config);
  if (want("k", "--k")) opt.spec.k = std::stoi(kv.at("k"));
  if (want("trials", "--trials")) opt.spec.trials = std::stoi(kv.at("trials"));
  if (want("inlier_rate", "--inlier-rate")) opt.spec.inlier_rate = std::stod(kv.at("inlier_rate"));
  if (want("sigma_deg", "--sigma-deg"))
    opt.spec.inlier_sigma_deg = std::stod(kv.at("sigma_deg"));
  if (want("n_theta", "--n-theta")) opt.spec.n_theta = std::stoi(kv.at("n_theta"));
  if (want("seed", "--seed")) opt.spec.seed = std::stoull(kv.at("seed"));
  if (want("method", "--method")) opt.spec.method = kv.at("method");
  if (want("alpha", "--alpha"))
    opt.alpha = kv.at("alpha") == "na" ? -1.0 : std::stod(kv.at("alpha"));
  if (want("mu", "--mu")) opt.spec.solver.mu = std::stod(kv.at("mu"));
  if (want("gamma", "--gamma")) opt.spec.solver.gamma = std::stod(kv.at("gamma"));
  if (want("epsilon", "--epsilon")) opt.spec.solver.epsilon = std::stod(kv.at("epsilon"));
  if (want("n_irls", "--n-irls")) opt.spec.solver.n_irls = std::stoi(kv.at("n_irls"));
  if (want("max_admm_iters", "--max-iters"))
    opt.spec.solver.max_admm_iters = std::stoi(kv.at("max_admm_iters"));
  if (want("tol_primal", "--tol-primal"))
    opt.spec.solver.tol_primal = std::stod(kv.at("tol_primal"));
  if (want("tol_dual", "--tol-dual")) opt.spec.solver.tol_dual = std::stod(kv.at("tol_dual"));
  if (want("p", "--p")) opt.spec.solver.p = std::stod(kv.at("p"));
  if (want("out", "--out")) opt.spec.output_dir = kv.at("out");
  if (want("dataset", "--dataset")) opt.dataset = kv.at("dataset");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotation estimation from common lines via semidefinite relaxation"};
  app.require_subcommand(1);

  CliOptions opt;

  auto* simulate = app.add_subcommand("simulate", "generate a corrupted common-line dataset");
  simulate->add_option("--config", opt.config, "key = value file with any of these options");
  simulate->add_option("--k", opt.spec.k, "number of images");
  simulate->add_option("--trials", opt.spec.trials, "independent trials");
  simulate->add_option("--inlier-rate", opt.spec.inlier_rate, "inlier probability in (0, 1]");
  simulate->add_option("--sigma-deg", opt.spec.inlier_sigma_deg, "inlier angular noise (deg)");
  simulate->add_option("--n-theta", opt.spec.n_theta, "angular grid size (even)");
  simulate->add_option("--seed", opt.spec.seed, "base RNG seed");
  simulate->add_option("--out", opt.spec.output_dir, "output directory");

  auto* solve = app.add_subcommand("solve", "solve one dataset and append a result row");
  solve->add_option("--config", opt.config, "key = value file with any of these options");
  solve->add_option("--dataset", opt.dataset, "trial directory from simulate");
  solve->add_option("--method", opt.spec.method, "ls | lud-admm | irls");
  solve->add_option("--out", opt.spec.output_dir, "output directory");
  solve->add_option("--seed", opt.spec.seed, "rounding seed");
  add_solver_flags(solve, opt);

  auto* sweep = app.add_subcommand("sweep", "run a method/alpha/rate/seed grid");
  sweep->add_option("--grid", opt.grid, "grid description file (key = value)")->required();
  sweep->add_option("--out", opt.spec.output_dir, "output directory")->required();

  auto* report = app.add_subcommand("report", "aggregate a results CSV");
  report->add_option("--results", opt.results, "results.csv or sweep_results.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      apply_config(simulate, opt);
      if (opt.spec.output_dir.empty())
        throw std::invalid_argument("simulate: --out (or config key 'out') is required");
      clorient::cmd_simulate(opt.spec);
    } else if (solve->parsed()) {
      apply_config(solve, opt);
      if (opt.alpha >= 0.0) opt.spec.solver.alpha = opt.alpha;
      if (opt.dataset.empty())
        throw std::invalid_argument("solve: --dataset (or config key 'dataset') is required");
      if (opt.spec.output_dir.empty())
        throw std::invalid_argument("solve: --out (or config key 'out') is required");
      const auto row = clorient::cmd_solve(opt.dataset, opt.spec);
      std::cout << clorient::result_csv_header() << '\n' << clorient::to_csv_row(row) << '\n';
      if (row.status != "ok") {
        std::cerr << "solve failed: " << row.reason << '\n';
        return 3;
      }
    } else if (sweep->parsed()) {
      clorient::cmd_sweep(opt.grid, opt.spec.output_dir);
    } else if (report->parsed()) {
      clorient::cmd_report(opt.results, std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const clorient::DivergenceError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const clorient::DegenerateRoundingError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const clorient::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
