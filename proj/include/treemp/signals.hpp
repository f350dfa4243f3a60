#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "treemp/linalg.hpp"

namespace treemp {

/// Distribution of the nonzero coefficients of generated signals.
enum class CoefficientLaw {
  gaussian,  // standard normal, redrawn while |value| < 1e-6
  sign,      // +1 or -1 with equal probability
};

struct SparseSignal {
  int n = 0;
  int k = 0;
  SupportSet support;
  std::vector<double> values;  // one per support index, ascending index order

  DenseVector dense() const;
};

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct MeasurementInstance {
  DenseMatrix phi;
  SparseSignal x;
  DenseVector v;  // additive noise, zero when noiseless
  DenseVector y;  // phi * x + v
  std::uint64_t seed = 0;
  double snr_db = kNoiseless;

  bool noiseless() const noexcept { return snr_db == kNoiseless; }
};

struct Metrics {
  double err = 0.0;
  double mse = 0.0;
  double snr_db = kNoiseless;
};

/// One recovery trial as seen by compute_metrics. The true support is the
/// nonzero pattern of x_true.
struct TrialOutcome {
  DenseVector x_true;
  DenseVector x_hat;
  SupportSet support_hat;
};

/// Derives an independent sub-stream seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Entries i.i.d. N(0, 1/m) from a std::mt19937_64 seeded with `seed`.
DenseMatrix gen_sensing_matrix(int m, int n, std::uint64_t seed);

/// Support uniform without replacement (partial Fisher-Yates), values per `law`.
SparseSignal gen_sparse_signal(int n, int k, std::uint64_t seed,
                               CoefficientLaw law = CoefficientLaw::gaussian);

/// Builds y = phi x + v with v a Gaussian direction scaled so the realized SNR
/// equals snr_db exactly. snr_db == kNoiseless gives v = 0.
MeasurementInstance add_noise_for_snr(const DenseMatrix& phi, const SparseSignal& x,
                                      double snr_db, std::uint64_t seed);

/// The instance used for trial `trial_seed` of an (m, n, k, snr) sweep point.
/// Matrix, signal and noise draw from separate derived streams.
MeasurementInstance make_instance(int m, int n, int k, double snr_db, std::uint64_t trial_seed,
                                  CoefficientLaw law = CoefficientLaw::gaussian);

/// 10*log10(||phi x||^2 / ||v||^2)
double realized_snr_db(const MeasurementInstance& inst);

/// ERR counts trials whose support_hat equals the nonzero pattern of x_true;
/// MSE = mean over trials of ||x_true - x_hat||^2 / N.
Metrics compute_metrics(std::span<const TrialOutcome> trials, double snr_db = kNoiseless);

/// Plain-decimal CSV dump: a `m,n,k,seed,snr_db` header and its value row,
/// then sections `phi` (m rows), `x`, `v`, `y` each introduced by a label row.
void write_instance_csv(std::ostream& os, const MeasurementInstance& inst);
MeasurementInstance read_instance_csv(std::istream& is);

}  // namespace treemp
