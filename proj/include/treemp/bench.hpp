#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treemp/analysis.hpp"
#include "treemp/config.hpp"

namespace treemp {

struct SweepRecord {
  std::string algorithm;
  std::string sweep_param;  // "k" or "snr_db"
  double sweep_value = 0.0;
  int trials = 0;
  double err = 0.0;
  double mse = 0.0;
  double mean_runtime_s = 0.0;
  std::uint64_t seed = 0;
};

struct SweepReport {
  std::vector<SweepRecord> records;
  // Trials in which an algorithm returned the true support, and how many of
  // those produced an estimate differing from the oracle by more than 1e-10.
  std::size_t oracle_checks = 0;
  std::size_t oracle_mismatches = 0;
  double max_oracle_deviation = 0.0;
  // Fraction of trials with T inside the TMP pre-selection, per sweep point.
  std::vector<double> preselection_containment;
};

/// Support and refit estimate of one algorithm on one instance.
struct AlgorithmRun {
  SupportSet support;
  DenseVector x_hat;
};

/// Runs a named algorithm (see is_known_algorithm). `tmp` supplies l, the
/// pre-selection settings and n_max for "tmp"; k is taken from the instance.
/// Every estimate is the least-squares refit on the returned support.
AlgorithmRun run_algorithm(const std::string& name, const MeasurementInstance& inst,
                           const TmpConfig& tmp);

/// CoSaMP merges up to 3k columns and needs 3k <= m; sweeps report NaN otherwise.
bool cosamp_applicable(int k, int m);

/// Row name of the pre-selection stage (its first K indices, refit), added
/// to a sweep whenever a TMP variant runs.
inline constexpr const char* kPreselectionRow = "preselection_only";

/// ERR and MSE for every k in config.k_list at snr_list.front().
SweepReport run_err_sweep(const ExperimentConfig& config);
/// MSE for every snr in config.snr_list at k_list.front(); oracle is always included.
SweepReport run_mse_sweep(const ExperimentConfig& config);
/// Like run_err_sweep but always single-threaded, for clean runtimes.
SweepReport run_timing(const ExperimentConfig& config);

/// Header `algorithm,sweep_param,sweep_value,trials,err,mse,mean_runtime_s,seed`,
/// 10 significant digits. Runtimes print as "na" when include_runtime is false.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records,
                     bool include_runtime = true);

struct DiagnosticsConfig {
  int m = 8;
  int n = 12;
  int k = 2;
  int l = 2;
  int instances = 50;
  double snr_db = kNoiseless;
  std::uint64_t seed = 1;
};

/// Diagnostic rows for one instance and causal set: RIC brute-forced up to
/// max(m, l + k, 2k, k + 1) (capped at n), bounds, conditions, then the
/// outcome of a full TMP search (tmp_recovery, stability).
std::vector<DiagnosticRow> diagnose_instance(const MeasurementInstance& inst, const SupportSet& causal,
                                             int l, const std::string& id);

/// Tiny Gaussian instances: brute-forced RIC, the six correlation bounds on a
/// random true path, the recovery conditions and, where they apply, the
/// outcome of a full TMP search (Theta = all columns).
std::vector<DiagnosticRow> run_diagnostics(const DiagnosticsConfig& config);

}  // namespace treemp
