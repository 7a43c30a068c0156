#include "clorient/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "clorient/io.hpp"
#include "clorient/rounding.hpp"
#include "clorient/simulate.hpp"

namespace clorient {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "method,alpha,inlier_rate,K,seed,mse,lud_objective,rank3_gap,alpha_hat,iterations,"
    "wall_time_seconds,status,reason";

std::string alpha_tag(const std::optional<double>& alpha) {
  return alpha ? io::format_double(*alpha) : std::string("na");
}

// Short form for file names and aggregation keys.
std::string alpha_label(const std::optional<double>& alpha) {
  if (!alpha) return "na";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", *alpha);
  return buf;
}

std::string sanitize_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

CorruptionModel corruption_of(const ExperimentSpec& spec, std::uint64_t seed) {
  CorruptionModel model;
  model.inlier_rate = spec.inlier_rate;
  model.inlier_sigma_deg = spec.inlier_sigma_deg;
  model.n_theta = spec.n_theta;
  model.seed = seed;
  return model;
}

SolveReport dispatch_method(const std::string& method, const CommonLineSet& cls,
                            const SolverConfig& cfg) {
  if (method == "ls") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(cls.k, cls.k);
    w.diagonal().setZero();
    return ls_sdr(cls, w, cfg);
  }
  if (method == "lud-admm") return admm_lud(cls, cfg);
  if (method == "irls") return irls(cls, cfg);
  throw std::invalid_argument("unknown method '" + method +
                              "' (expected ls, lud-admm or irls)");
}

void write_report_json(const std::filesystem::path& path, const ResultRow& row,
                       const SolveReport& report, const SpectrumReport& spectrum) {
  json doc;
  doc["method"] = row.method;
  if (row.alpha)
    doc["alpha"] = *row.alpha;
  else
    doc["alpha"] = nullptr;
  doc["inlier_rate"] = row.inlier_rate;
  doc["K"] = row.k;
  doc["seed"] = row.seed;
  doc["status"] = row.status;
  doc["reason"] = row.reason;
  doc["mse"] = row.mse;
  doc["lud_objective"] = row.lud_objective;
  doc["converged"] = report.converged;
  doc["iterations"] = report.iterations;
  doc["outer_iterations"] = report.outer_iterations;
  doc["wall_time_seconds"] = report.wall_time_seconds;
  doc["objective_history"] = report.objective_history;
  doc["primal_residual_history"] = report.primal_residual_history;
  doc["dual_residual_history"] = report.dual_residual_history;
  doc["theta_norm_history"] = report.theta_norm_history;
  doc["irls_residuals"] = report.irls_residuals;
  doc["irls_objective_history"] = report.irls_objective_history;
  doc["rank3_gap"] = spectrum.rank3_gap;
  doc["alpha_hat"] = spectrum.alpha_hat;
  doc["eigenvalues"] =
      std::vector<double>(spectrum.eigenvalues.data(),
                          spectrum.eigenvalues.data() + spectrum.eigenvalues.size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
}

struct Aggregate {
  int ok = 0;
  int failed = 0;
  std::vector<double> mses;

  double mean() const {
    if (mses.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (double m : mses) total += m;
    return total / static_cast<double>(mses.size());
  }
  double median() const {
    if (mses.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> sorted = mses;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
};

using CellKey = std::tuple<std::string, std::string, double, int>;  // method, alpha, rate, K

std::map<CellKey, Aggregate> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::map<CellKey, Aggregate> cells;
  for (const auto& row : rows) {
    auto& cell = cells[{row.method, alpha_label(row.alpha), row.inlier_rate, row.k}];
    if (row.status == "ok") {
      ++cell.ok;
      cell.mses.push_back(row.mse);
    } else {
      ++cell.failed;
    }
  }
  return cells;
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (spec.k < 3) throw std::invalid_argument("ExperimentSpec: need K >= 3");
  if (spec.trials < 1) throw std::invalid_argument("ExperimentSpec: need trials >= 1");
  if (spec.method != "ls" && spec.method != "lud-admm" && spec.method != "irls")
    throw std::invalid_argument("ExperimentSpec: unknown method '" + spec.method + "'");
  validate(corruption_of(spec, spec.seed));
  validate(spec.solver);
  if (spec.output_dir.empty())
    throw std::invalid_argument("ExperimentSpec: output_dir must be set");
}

std::string result_csv_header() { return kCsvHeader; }

std::string to_csv_row(const ResultRow& row) {
  std::ostringstream out;
  out << sanitize_field(row.method) << ',' << alpha_tag(row.alpha) << ','
      << io::format_double(row.inlier_rate) << ',' << row.k << ',' << row.seed << ','
      << io::format_double(row.mse) << ',' << io::format_double(row.lud_objective) << ','
      << io::format_double(row.rank3_gap) << ',' << io::format_double(row.alpha_hat) << ','
      << row.iterations << ',' << io::format_double(row.wall_time_seconds) << ','
      << row.status << ',' << sanitize_field(row.reason);
  return out.str();
}

ResultRow parse_csv_row(const std::string& line) {
  const auto fields = split(line, ',');
  if (fields.size() != 13)
    throw IoError("malformed result row (" + std::to_string(fields.size()) +
                  " fields): " + line);
  ResultRow row;
  row.method = fields[0];
  if (fields[1] != "na") row.alpha = std::stod(fields[1]);
  row.inlier_rate = std::stod(fields[2]);
  row.k = std::stoi(fields[3]);
  row.seed = std::stoull(fields[4]);
  row.mse = std::stod(fields[5]);
  row.lud_objective = std::stod(fields[6]);
  row.rank3_gap = std::stod(fields[7]);
  row.alpha_hat = std::stod(fields[8]);
  row.iterations = std::stoi(fields[9]);
  row.wall_time_seconds = std::stod(fields[10]);
  row.status = fields[11];
  row.reason = fields[12];
  return row;
}

void append_result(const std::filesystem::path& csv, const ResultRow& row) {
  const bool fresh = !std::filesystem::exists(csv);
  std::ofstream out(csv, std::ios::app);
  if (!out) throw IoError("cannot open for writing: " + csv.string());
  if (fresh) out << kCsvHeader << '\n';
  out << to_csv_row(row) << '\n';
}

std::vector<ResultRow> read_results(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open for reading: " + csv.string());
  std::vector<ResultRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (first) {
      first = false;
      if (line == kCsvHeader) continue;
    }
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

void cmd_simulate(const ExperimentSpec& spec) {
  validate(spec);
  std::filesystem::create_directories(spec.output_dir);
  for (int trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = spec.seed + static_cast<std::uint64_t>(trial);
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03d", trial);
    const auto dir = spec.output_dir / name;
    std::filesystem::create_directories(dir);

    const RotationList truth = sample_uniform_rotations(spec.k, trial_seed);
    const CommonLineSet cls = corrupt(truth, corruption_of(spec, trial_seed));
    io::write_rotations(dir / "rotations.txt", truth);
    io::write_common_lines(dir / "commonlines.txt", cls);

    const double rate = measure_detection_rate(truth, cls, 10.0);
    io::write_key_values(dir / "manifest.txt",
                         {{"k", std::to_string(spec.k)},
                          {"n_theta", std::to_string(spec.n_theta)},
                          {"inlier_rate", io::format_double(spec.inlier_rate)},
                          {"inlier_sigma_deg", io::format_double(spec.inlier_sigma_deg)},
                          {"seed", std::to_string(trial_seed)},
                          {"trial", std::to_string(trial)},
                          {"detection_rate_10deg", io::format_double(rate)}});
  }
}

ResultRow cmd_solve(const std::filesystem::path& dataset_dir, const ExperimentSpec& spec) {
  validate(spec.solver);
  const RotationList truth = io::read_rotations(dataset_dir / "rotations.txt");
  const CommonLineSet cls = io::read_common_lines(dataset_dir / "commonlines.txt");

  ResultRow row;
  row.method = spec.method;
  row.alpha = spec.solver.alpha;
  row.inlier_rate = spec.inlier_rate;
  row.k = cls.k;
  row.seed = spec.seed;

  // The dataset's manifest is the authoritative label for its inlier rate.
  if (std::filesystem::exists(dataset_dir / "manifest.txt")) {
    const auto manifest = io::read_key_values(dataset_dir / "manifest.txt");
    if (const auto it = manifest.find("inlier_rate"); it != manifest.end())
      row.inlier_rate = std::stod(it->second);
  }

  SolveReport report;
  SpectrumReport spectrum;
  try {
    report = dispatch_method(spec.method, cls, spec.solver);
    spectrum = spectrum_report(report.gram);
    row.rank3_gap = spectrum.rank3_gap;
    row.alpha_hat = spectrum.alpha_hat;
    row.iterations = report.iterations;
    row.wall_time_seconds = report.wall_time_seconds;
    row.lud_objective = lud_objective(report.gram, cls);

    RoundingConfig rounding;
    rounding.seed = spec.seed;
    const RotationList estimate = round_gram(report.gram, rounding);
    row.mse = register_and_mse(truth, estimate).mse;
  } catch (const DivergenceError& e) {
    row.status = "failed";
    row.reason = std::string("divergence: ") + e.what();
  } catch (const DegenerateRoundingError& e) {
    row.status = "failed";
    row.reason = std::string("degenerate-rounding: ") + e.what();
  }

  std::filesystem::create_directories(spec.output_dir);
  append_result(spec.output_dir / "results.csv", row);
  const std::string sidecar = "report_" + spec.method + "_a" + alpha_label(spec.solver.alpha) +
                              "_seed" + std::to_string(spec.seed) + ".json";
  write_report_json(spec.output_dir / sidecar, row, report, spectrum);
  return row;
}

void cmd_sweep(const std::filesystem::path& grid_file, const std::filesystem::path& out_dir) {
  const auto kv = io::read_key_values(grid_file);
  static const std::set<std::string> known_keys = {
      "k",          "seed",    "trials",  "methods", "alphas",         "inlier_rates",
      "sigma_deg",  "n_theta", "mu",      "gamma",   "epsilon",        "n_irls",
      "tol_primal", "tol_dual", "p",      "max_admm_iters"};
  for (const auto& [key, value] : kv)
    if (!known_keys.contains(key))
      throw std::invalid_argument("unknown grid key '" + key + "' in " + grid_file.string());
  const auto get = [&](const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };

  const int k = std::stoi(get("k", "20"));
  if (k < 3) throw std::invalid_argument("sweep grid: need k >= 3");
  const double sigma_deg = std::stod(get("sigma_deg", "0"));
  const int n_theta = std::stoi(get("n_theta", "360"));
  const std::uint64_t seed0 = std::stoull(get("seed", "1"));
  const int trials = std::stoi(get("trials", "1"));

  std::vector<std::string> methods;
  for (const auto& m : split(get("methods", ""), ','))
    if (!trim(m).empty()) methods.push_back(trim(m));
  std::vector<std::optional<double>> alphas;
  for (const auto& a : split(get("alphas", "na"), ',')) {
    const std::string t = trim(a);
    if (t.empty()) continue;
    if (t == "na")
      alphas.push_back(std::nullopt);
    else
      alphas.push_back(std::stod(t));
  }
  std::vector<double> rates;
  for (const auto& r : split(get("inlier_rates", ""), ','))
    if (!trim(r).empty()) rates.push_back(std::stod(trim(r)));

  if (methods.empty() || alphas.empty() || rates.empty() || trials < 1)
    throw std::invalid_argument("sweep grid is empty: need methods, alphas, inlier_rates and "
                                "trials >= 1 in " + grid_file.string());

  SolverConfig base;
  if (kv.count("mu")) base.mu = std::stod(kv.at("mu"));
  if (kv.count("gamma")) base.gamma = std::stod(kv.at("gamma"));
  if (kv.count("epsilon")) base.epsilon = std::stod(kv.at("epsilon"));
  if (kv.count("n_irls")) base.n_irls = std::stoi(kv.at("n_irls"));
  if (kv.count("max_admm_iters")) base.max_admm_iters = std::stoi(kv.at("max_admm_iters"));
  if (kv.count("tol_primal")) base.tol_primal = std::stod(kv.at("tol_primal"));
  if (kv.count("tol_dual")) base.tol_dual = std::stod(kv.at("tol_dual"));
  if (kv.count("p")) base.p = std::stod(kv.at("p"));

  struct Cell {
    std::string method;
    std::optional<double> alpha;
    double rate;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& method : methods)
    for (const auto& alpha : alphas)
      for (double rate : rates)
        for (int t = 0; t < trials; ++t)
          cells.push_back({method, alpha, rate, seed0 + static_cast<std::uint64_t>(t)});

  // Validate the whole grid up front so a bad alpha rejects the sweep rather
  // than one cell.
  for (const auto& cell : cells) {
    SolverConfig cfg = base;
    cfg.alpha = cell.alpha;
    validate(cfg);
    validate(CorruptionModel{cell.rate, sigma_deg, n_theta, cell.seed});
  }

  const auto run_cell = [&](const Cell& cell) -> ResultRow {
    ResultRow row;
    row.method = cell.method;
    row.alpha = cell.alpha;
    row.inlier_rate = cell.rate;
    row.k = k;
    row.seed = cell.seed;
    try {
      const RotationList truth = sample_uniform_rotations(k, cell.seed);
      const CommonLineSet cls = corrupt(truth, {cell.rate, sigma_deg, n_theta, cell.seed});
      SolverConfig cfg = base;
      cfg.alpha = cell.alpha;
      cfg.seed = cell.seed;
      const SolveReport report = dispatch_method(cell.method, cls, cfg);
      const SpectrumReport spectrum = spectrum_report(report.gram);
      row.rank3_gap = spectrum.rank3_gap;
      row.alpha_hat = spectrum.alpha_hat;
      row.iterations = report.iterations;
      row.wall_time_seconds = report.wall_time_seconds;
      row.lud_objective = lud_objective(report.gram, cls);
      RoundingConfig rounding;
      rounding.seed = cell.seed;
      row.mse = register_and_mse(truth, round_gram(report.gram, rounding)).mse;
    } catch (const DivergenceError& e) {
      row.status = "failed";
      row.reason = std::string("divergence: ") + e.what();
    } catch (const DegenerateRoundingError& e) {
      row.status = "failed";
      row.reason = std::string("degenerate-rounding: ") + e.what();
    }
    return row;
  };

  // Cells run concurrently; each owns its seeds, results merge single-writer
  // in deterministic cell order.
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<ResultRow> rows(cells.size());
  for (std::size_t begin = 0; begin < cells.size(); begin += workers) {
    const std::size_t end = std::min(cells.size(), begin + workers);
    std::vector<std::future<ResultRow>> batch;
    for (std::size_t c = begin; c < end; ++c)
      batch.push_back(std::async(std::launch::async, run_cell, cells[c]));
    for (std::size_t c = begin; c < end; ++c) rows[c] = batch[c - begin].get();
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "sweep_results.csv");
    if (!out) throw IoError("cannot open for writing: " + (out_dir / "sweep_results.csv").string());
    out << kCsvHeader << '\n';
    for (const auto& row : rows) out << to_csv_row(row) << '\n';
  }
  {
    std::ofstream out(out_dir / "sweep_summary.csv");
    if (!out) throw IoError("cannot open for writing: " + (out_dir / "sweep_summary.csv").string());
    out << "method,alpha,inlier_rate,K,n_ok,n_failed,mean_mse,median_mse\n";
    for (const auto& [key, cell] : aggregate_rows(rows)) {
      out << std::get<0>(key) << ',' << std::get<1>(key) << ','
          << io::format_double(std::get<2>(key)) << ',' << std::get<3>(key) << ',' << cell.ok
          << ',' << cell.failed << ',' << io::format_double(cell.mean()) << ','
          << io::format_double(cell.median()) << '\n';
    }
  }
}

void cmd_report(const std::filesystem::path& results_csv, std::ostream& out) {
  const auto rows = read_results(results_csv);
  if (rows.empty()) throw IoError("no result rows in " + results_csv.string());
  out << std::left << std::setw(10) << "method" << std::setw(8) << "alpha" << std::setw(8)
      << "rate" << std::setw(6) << "K" << std::setw(6) << "ok" << std::setw(8) << "failed"
      << std::setw(14) << "mean_mse" << std::setw(14) << "median_mse" << '\n';
  for (const auto& [key, cell] : aggregate_rows(rows)) {
    std::ostringstream mean, median;
    mean << std::setprecision(4) << cell.mean();
    median << std::setprecision(4) << cell.median();
    out << std::left << std::setw(10) << std::get<0>(key) << std::setw(8) << std::get<1>(key)
        << std::setw(8) << std::get<2>(key) << std::setw(6) << std::get<3>(key) << std::setw(6)
        << cell.ok << std::setw(8) << cell.failed << std::setw(14) << mean.str()
        << std::setw(14) << median.str() << '\n';
  }
}

}  // namespace clorient
