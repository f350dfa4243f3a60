#include "treemp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

namespace treemp {

namespace {

bool is_tmp_variant(const std::string& name) { return name == "tmp" || name.rfind("tmp_nmax", 0) == 0; }

SupportSet first_k(const std::vector<Index>& order, int k) {
  const auto count = std::min<std::size_t>(order.size(), static_cast<std::size_t>(k));
  return SupportSet::from_indices(std::vector<Index>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count)));
}

AlgorithmRun refit(const MeasurementInstance& inst, const SupportSet& support) {
  RecoveryResult r = fit_on_support(inst.phi, inst.y, support);
  return {std::move(r.support), std::move(r.x_hat)};
}

}  // namespace

bool cosamp_applicable(int k, int m) { return 3 * k <= m; }

AlgorithmRun run_algorithm(const std::string& name, const MeasurementInstance& inst,
                           const TmpConfig& base) {
  const int k = static_cast<int>(inst.x.support.size());
  const int m = static_cast<int>(inst.phi.rows());
  TmpConfig cfg = base;
  cfg.k = k;

  if (name == "omp") {
    const auto order = omp(inst.phi, inst.y, k);
    return refit(inst, SupportSet::from_indices(order));
  }
  if (name == "gomp") {
    const int iterations = std::min(k, m / cfg.l);
    const PreselectionResult pre = gomp(inst.phi, inst.y, iterations, cfg.l);
    // Keep the k largest least-squares coefficients over Theta, then refit.
    const DenseVector c = least_squares_on_support(inst.phi, inst.y, pre.theta);
    std::vector<Correlation> magnitudes;
    for (std::size_t i = 0; i < pre.theta.size(); ++i)
      magnitudes.push_back({pre.theta[i], std::abs(c(static_cast<Eigen::Index>(i)))});
    const auto keep = std::min(magnitudes.size(), static_cast<std::size_t>(k));
    return refit(inst, top_k_by_magnitude(magnitudes, keep));
  }
  if (name == "cosamp") {
    if (!cosamp_applicable(k, m)) throw Error(ErrorCode::InvalidArgument, "cosamp needs 3k <= m");
    return refit(inst, cosamp(inst.phi, inst.y, k));
  }
  if (name == "oracle") return refit(inst, inst.x.support);
  if (name == kPreselectionRow) {
    const PreselectionResult pre = preselect(inst.phi, inst.y, cfg);
    return refit(inst, first_k(pre.order, k));
  }
  if (is_tmp_variant(name)) {
    if (name != "tmp") cfg.n_max = std::stoi(name.substr(8));
    const RecoveryResult r = tmp(inst.phi, inst.y, cfg);
    return refit(inst, r.support);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + name + "'");
}

namespace {

struct Cell {
  bool ran = false;
  bool exact = false;
  double sq_error = 0.0;
  double seconds = 0.0;
  bool oracle_checked = false;
  double oracle_deviation = 0.0;
};

struct TrialResult {
  std::vector<Cell> cells;  // one per row
  bool contained = false;
};

std::vector<std::string> rows_for(const ExperimentConfig& config, bool force_oracle) {
  std::vector<std::string> rows = config.algorithms;
  const bool any_tmp = std::any_of(rows.begin(), rows.end(), is_tmp_variant);
  auto present = [&](const std::string& a) { return std::find(rows.begin(), rows.end(), a) != rows.end(); };
  if (any_tmp && !present(kPreselectionRow)) rows.push_back(kPreselectionRow);
  if (force_oracle && !present("oracle")) rows.push_back("oracle");
  return rows;
}

TrialResult run_trial(const ExperimentConfig& config, const std::vector<std::string>& rows, int k,
                      double snr, int trial) {
  const MeasurementInstance inst =
      make_instance(config.m, config.n, k, snr, config.seed + static_cast<std::uint64_t>(trial), config.law);
  const DenseVector x = inst.x.dense();
  TmpConfig cfg = config.tmp;
  cfg.k = k;

  TrialResult out;
  out.cells.resize(rows.size());
  std::optional<DenseVector> oracle;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    Cell& cell = out.cells[a];
    if (rows[a] == "cosamp" && !cosamp_applicable(k, config.m)) continue;  // row reports NaN
    const auto t0 = std::chrono::steady_clock::now();
    const AlgorithmRun run = run_algorithm(rows[a], inst, cfg);
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cell.ran = true;
    cell.exact = run.support == inst.x.support;
    cell.sq_error = (x - run.x_hat).squaredNorm();
    if (cell.exact) {
      if (!oracle) oracle = fit_on_support(inst.phi, inst.y, inst.x.support).x_hat;
      cell.oracle_checked = true;
      cell.oracle_deviation = (run.x_hat - *oracle).cwiseAbs().maxCoeff();
    }
  }
  if (std::any_of(rows.begin(), rows.end(), is_tmp_variant)) {
    out.contained = preselect(inst.phi, inst.y, cfg).theta.includes(inst.x.support);
  }
  return out;
}

std::vector<TrialResult> run_point(const ExperimentConfig& config, const std::vector<std::string>& rows,
                                   int k, double snr, bool sequential) {
  std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
  int workers = sequential ? 1 : config.threads;
  if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, config.trials);
  if (workers <= 1) {
    for (int t = 0; t < config.trials; ++t) results[static_cast<std::size_t>(t)] = run_trial(config, rows, k, snr, t);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < config.trials; t = next++) {
        try {
          results[static_cast<std::size_t>(t)] = run_trial(config, rows, k, snr, t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

void summarize(const ExperimentConfig& config, const std::vector<std::string>& rows,
               const std::vector<TrialResult>& results, const std::string& param, double value,
               SweepReport& report) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double trials = static_cast<double>(results.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    SweepRecord rec{rows[a], param, value, config.trials, 0.0, 0.0, 0.0, config.seed};
    bool all_ran = true;
    for (const auto& r : results) {
      const Cell& c = r.cells[a];
      all_ran = all_ran && c.ran;
      rec.err += c.exact ? 1.0 : 0.0;
      rec.mse += c.sq_error / static_cast<double>(config.n);
      rec.mean_runtime_s += c.seconds;
      if (c.oracle_checked) {
        ++report.oracle_checks;
        report.max_oracle_deviation = std::max(report.max_oracle_deviation, c.oracle_deviation);
        if (!(c.oracle_deviation <= 1e-10)) ++report.oracle_mismatches;
      }
    }
    rec.err = all_ran ? rec.err / trials : nan;
    rec.mse = all_ran ? rec.mse / trials : nan;
    rec.mean_runtime_s = all_ran ? rec.mean_runtime_s / trials : nan;
    report.records.push_back(rec);
  }
  if (std::any_of(rows.begin(), rows.end(), is_tmp_variant)) {
    double contained = 0.0;
    for (const auto& r : results) contained += r.contained ? 1.0 : 0.0;
    report.preselection_containment.push_back(contained / trials);
  }
}

SweepReport k_sweep(const ExperimentConfig& config, bool sequential) {
  config.validate();
  const auto rows = rows_for(config, false);
  const double snr = config.snr_list.front();
  SweepReport report;
  for (int k : config.k_list) {
    const auto results = run_point(config, rows, k, snr, sequential);
    summarize(config, rows, results, "k", k, report);
  }
  return report;
}

}  // namespace

SweepReport run_err_sweep(const ExperimentConfig& config) {
  if (config.snr_list.size() != 1 || config.snr_list.front() != kNoiseless) {
    throw Error(ErrorCode::InvalidConfig, "ERR sweeps are noiseless (snr = inf)");
  }
  return k_sweep(config, false);
}

SweepReport run_timing(const ExperimentConfig& config) {
  if (config.snr_list.size() != 1) throw Error(ErrorCode::InvalidConfig, "timing runs take a single snr");
  return k_sweep(config, true);
}

SweepReport run_mse_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.k_list.size() != 1) throw Error(ErrorCode::InvalidConfig, "MSE sweeps take a single k");
  const auto rows = rows_for(config, true);
  const int k = config.k_list.front();
  SweepReport report;
  for (double snr : config.snr_list) {
    const auto results = run_point(config, rows, k, snr, false);
    summarize(config, rows, results, "snr_db", snr, report);
  }
  return report;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records, bool include_runtime) {
  const auto old_precision = os.precision(10);
  os << "algorithm,sweep_param,sweep_value,trials,err,mse,mean_runtime_s,seed\n";
  for (const auto& r : records) {
    os << r.algorithm << ',' << r.sweep_param << ',' << r.sweep_value << ',' << r.trials << ','
       << r.err << ',' << r.mse << ',';
    if (include_runtime) os << r.mean_runtime_s; else os << "na";
    os << ',' << r.seed << '\n';
  }
  os.precision(old_precision);
}

std::vector<DiagnosticRow> diagnose_instance(const MeasurementInstance& inst, const SupportSet& causal,
                                             int l, const std::string& id) {
  const int m = static_cast<int>(inst.phi.rows());
  const int n = static_cast<int>(inst.phi.cols());
  const int k = static_cast<int>(inst.x.support.size());
  const int order = std::min(n, std::max({m, l + k, 2 * k, k + 1}));
  const RicTable ric = ric_bruteforce(inst.phi, order, id);

  std::vector<DiagnosticRow> rows;
  const BoundDiagnostics bounds = evaluate_bounds(ric, inst, causal, l);
  for (auto& r : diagnostic_rows(bounds, id)) rows.push_back(std::move(r));

  double min_abs = std::numeric_limits<double>::infinity();
  for (double v : inst.x.values) min_abs = std::min(min_abs, std::abs(v));
  const RecoveryConditions cond = check_recovery_conditions(ric, m, k, l, min_abs, inst.v.norm());
  for (auto& r : diagnostic_rows(cond, id)) rows.push_back(std::move(r));

  TmpConfig cfg;
  cfg.k = k;
  cfg.l = l;
  cfg.preselection = PreselectionMethod::full;
  const RecoveryResult res = tmp(inst.phi, inst.y, cfg);
  const bool exact = res.support == inst.x.support;
  const std::optional<bool> guaranteed = inst.noiseless() ? cond.tmp_noiseless : cond.noisy_support;
  Verdict v = Verdict::not_applicable;
  if (guaranteed && *guaranteed) v = exact ? Verdict::holds : Verdict::violated;
  rows.push_back({"tmp_recovery", id, exact ? 1.0 : 0.0, std::nullopt, v});

  const double error = (inst.x.dense() - res.x_hat).norm();
  v = Verdict::not_applicable;
  if (cond.stability_bound && cond.noisy_support && *cond.noisy_support) {
    v = error <= *cond.stability_bound + kVerdictSlack ? Verdict::holds : Verdict::violated;
  }
  rows.push_back({"stability", id, error, cond.stability_bound, v});
  return rows;
}

std::vector<DiagnosticRow> run_diagnostics(const DiagnosticsConfig& config) {
  if (config.instances < 1) throw Error(ErrorCode::InvalidConfig, "instances must be at least 1");
  if (config.k < 1 || config.k > config.n || config.l < 1) {
    throw Error(ErrorCode::InvalidConfig, "diagnostics need 1 <= k <= n and l >= 1");
  }
  std::vector<DiagnosticRow> rows;
  for (int i = 0; i < config.instances; ++i) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
    const DenseMatrix phi = gen_sensing_matrix(config.m, config.n, derive_seed(seed, 0));
    const SparseSignal x = gen_sparse_signal(config.n, config.k, derive_seed(seed, 1));
    const MeasurementInstance inst = add_noise_for_snr(phi, x, config.snr_db, derive_seed(seed, 2));

    // A random true path of length 0..k-1.
    std::mt19937_64 rng(derive_seed(seed, 3));
    std::vector<Index> t = x.support.indices();
    std::shuffle(t.begin(), t.end(), rng);
    std::uniform_int_distribution<int> depth(0, config.k - 1);
    t.resize(static_cast<std::size_t>(depth(rng)));

    for (auto& r : diagnose_instance(inst, SupportSet::from_indices(t), config.l, "diag" + std::to_string(i))) {
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace treemp
