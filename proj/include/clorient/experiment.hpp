#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "clorient/solvers.hpp"

// Experiment driver behind the CLI: dataset generation, solver dispatch,
// result rows, and sweep aggregation. Everything throws typed errors; the CLI
// maps them to exit codes.

namespace clorient {

struct ExperimentSpec {
  int k = 20;
  int trials = 1;
  double inlier_rate = 1.0;
  double inlier_sigma_deg = 0.0;
  int n_theta = 360;
  std::string method = "lud-admm";  // ls | lud-admm | irls
  SolverConfig solver;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
};

void validate(const ExperimentSpec& spec);

/// One solve outcome; failed solves are rows too, not crashes.
struct ResultRow {
  std::string method;
  std::optional<double> alpha;
  double inlier_rate = 1.0;
  int k = 0;
  std::uint64_t seed = 0;
  double mse = std::numeric_limits<double>::quiet_NaN();
  double lud_objective = std::numeric_limits<double>::quiet_NaN();
  double rank3_gap = std::numeric_limits<double>::quiet_NaN();
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_time_seconds = 0.0;
  std::string status = "ok";  // ok | failed
  std::string reason;
};

std::string result_csv_header();
std::string to_csv_row(const ResultRow& row);
ResultRow parse_csv_row(const std::string& line);
void append_result(const std::filesystem::path& csv, const ResultRow& row);
std::vector<ResultRow> read_results(const std::filesystem::path& csv);

/// Writes ground-truth rotations plus the corrupted common-line set for each
/// trial under output_dir/trial_NNN, with per-trial seeds spec.seed + trial.
void cmd_simulate(const ExperimentSpec& spec);

/// Loads a trial directory, runs the requested method, rounds, registers
/// against the stored truth, appends a row to output_dir/results.csv and a
/// JSON report sidecar. Solver failures come back as status == "failed".
ResultRow cmd_solve(const std::filesystem::path& dataset_dir, const ExperimentSpec& spec);

/// Cartesian sweep (methods x alphas x inlier rates x seeds) described by a
/// key-value grid file; cells run concurrently, partial failures are
/// recorded and the sweep continues. Writes sweep_results.csv and
/// sweep_summary.csv under out_dir.
void cmd_sweep(const std::filesystem::path& grid_file, const std::filesystem::path& out_dir);

/// Aggregates a results CSV into a per-cell table on the stream.
void cmd_report(const std::filesystem::path& results_csv, std::ostream& out);

}  // namespace clorient
