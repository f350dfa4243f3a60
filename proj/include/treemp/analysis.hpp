#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treemp/linalg.hpp"
#include "treemp/signals.hpp"

namespace treemp {

/// Restricted isometry constants of one matrix, exact for orders 1..exact_up_to.
struct RicTable {
  std::string matrix_id;
  std::vector<double> delta;  // delta[k - 1] is the order-k constant
  int exact_up_to = 0;
  int columns = 0;

  /// delta_k. Order 0 is 0. Orders above the column count equal delta_N,
  /// since every vector is then k-sparse. nullopt when the order was not computed.
  std::optional<double> at(int k) const;
  double require(int k) const;  // throws MissingRicOrder
};

inline constexpr std::uint64_t kMaxRicSupports = 1'000'000;

/// delta_k = max over |s| = k of the largest deviation of an eigenvalue of
/// phi_s' phi_s from 1, for k = 1..k_max (k_max capped at N).
RicTable ric_bruteforce(const DenseMatrix& phi, int k_max, std::string matrix_id = {});

/// Extreme correlations of a true path. lambda and beta share a definition
/// (smallest |phi_j' r| over the true indices not yet on the path), as do
/// gamma and alpha (largest |phi_j' r| off the support); they are kept apart
/// because different bounds apply to each.
struct CorrelationExtremes {
  double lambda = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double rho = 0.0;  // max over T of |phi_j' y|
  double eta = 0.0;  // l-th largest |phi_j' y| over the complement of T
};

CorrelationExtremes measure_correlation_extremes(const MeasurementInstance& inst,
                                                 const SupportSet& causal, int l);

/// holds/violated judge a measured quantity against a bound; satisfied and
/// unsatisfied report a sufficient condition; value marks a derived constant.
enum class Verdict { holds, violated, satisfied, unsatisfied, value, not_applicable };
std::string_view to_string(Verdict v);

inline constexpr double kVerdictSlack = 1e-9;

struct BoundCheck {
  std::string item;
  double measured = 0.0;
  std::optional<double> bound;
  bool lower = true;  // measured >= bound when true, measured <= bound otherwise
  Verdict verdict = Verdict::not_applicable;
};

struct BoundDiagnostics {
  CorrelationExtremes measured;
  std::vector<BoundCheck> checks;  // lambda_lower, gamma_upper, rho_lower, eta_upper, beta_lower, alpha_upper

  const BoundCheck& get(std::string_view item) const;
};

/// Evaluates the six correlation bounds of a true path. Bounds that need
/// delta_M are not applicable when that order is missing from `ric`; any
/// other missing order is an error. The lambda/gamma bounds only apply to
/// noiseless instances.
BoundDiagnostics evaluate_bounds(const RicTable& ric, const MeasurementInstance& inst,
                                 const SupportSet& causal, int l);

/// Sufficient recovery conditions and the constants behind them. Empty
/// optionals are not applicable (a denominator <= 0 or delta_M unavailable).
struct RecoveryConditions {
  int q_order = 0;                         // max(M, L + K)
  std::optional<double> delta_lk, delta_m, delta_q;
  double min_abs_x = 0.0;
  double noise_norm = 0.0;
  std::optional<bool> gomp_first_step;     // delta_{L+K} < sqrt(L) / (sqrt(L) + sqrt(K))
  std::optional<bool> tree_noiseless;      // delta_M < 1/3
  std::optional<bool> tmp_noiseless;       // delta_Q against the combined threshold
  double first_step_threshold = 0.0;
  double tmp_threshold = 0.0;
  std::optional<double> mu, omega, nu, gamma, tau;
  std::optional<bool> noisy_support;       // min |x_j| > gamma ||v||
  std::optional<double> stability_bound;   // tau ||v||
};

RecoveryConditions check_recovery_conditions(const RicTable& ric, int m, int k, int l,
                                             double min_abs_x, double noise_norm);

/// One CSV row per bound check and per condition, for one instance.
struct DiagnosticRow {
  std::string item;
  std::string instance;
  std::optional<double> measured;
  std::optional<double> bound;
  Verdict verdict = Verdict::not_applicable;
};

std::vector<DiagnosticRow> diagnostic_rows(const BoundDiagnostics& bounds, std::string_view instance);
std::vector<DiagnosticRow> diagnostic_rows(const RecoveryConditions& conditions,
                                           std::string_view instance);

/// Header `item,instance,measured,bound,verdict`; missing values print as "na".
void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows);

}  // namespace treemp
