#include "treemp/signals.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace treemp {

DenseVector SparseSignal::dense() const {
  DenseVector out = DenseVector::Zero(n);
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = values[i];
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

DenseMatrix gen_sensing_matrix(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) {
    throw Error(ErrorCode::InvalidArgument, "sensing matrix dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  DenseMatrix phi(m, n);
  // Row-major fill so the stream order matches the logical entry order.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) phi(i, j) = dist(rng);
  return phi;
}

SparseSignal gen_sparse_signal(int n, int k, std::uint64_t seed, CoefficientLaw law) {
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "sparsity must satisfy 1 <= k <= n");
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));

  SparseSignal x;
  x.n = n;
  x.k = k;
  x.support = SupportSet::from_indices(std::move(pool));
  x.values.reserve(static_cast<std::size_t>(k));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < k; ++i) {
    double value = 0.0;
    if (law == CoefficientLaw::sign) {
      value = coin(rng) ? 1.0 : -1.0;
    } else {
      do value = gauss(rng);
      while (std::abs(value) < 1e-6);
    }
    x.values.push_back(value);
  }
  return x;
}

MeasurementInstance add_noise_for_snr(const DenseMatrix& phi, const SparseSignal& x,
                                      double snr_db, std::uint64_t seed) {
  if (x.n != phi.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "signal length does not match matrix columns");
  }
  if (std::isnan(snr_db) || snr_db == -kNoiseless) {
    throw Error(ErrorCode::InvalidArgument, "SNR must be finite or the noiseless flag");
  }
  MeasurementInstance inst;
  inst.phi = phi;
  inst.x = x;
  inst.seed = seed;
  inst.snr_db = snr_db;
  const DenseVector clean = phi * x.dense();
  inst.v = DenseVector::Zero(phi.rows());
  if (snr_db != kNoiseless) {
    const double signal_energy = clean.squaredNorm();
    if (signal_energy == 0.0) {
      throw Error(ErrorCode::ZeroSignal, "cannot scale noise against a zero measurement");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseVector direction(phi.rows());
    do {
      for (Eigen::Index i = 0; i < direction.size(); ++i) direction(i) = gauss(rng);
    } while (direction.squaredNorm() == 0.0);
    const double target_norm = std::sqrt(signal_energy / std::pow(10.0, snr_db / 10.0));
    inst.v = direction * (target_norm / direction.norm());
  }
  inst.y = clean + inst.v;
  return inst;
}

MeasurementInstance make_instance(int m, int n, int k, double snr_db, std::uint64_t trial_seed,
                                  CoefficientLaw law) {
  const DenseMatrix phi = gen_sensing_matrix(m, n, derive_seed(trial_seed, 0));
  const SparseSignal x = gen_sparse_signal(n, k, derive_seed(trial_seed, 1), law);
  MeasurementInstance inst = add_noise_for_snr(phi, x, snr_db, derive_seed(trial_seed, 2));
  inst.seed = trial_seed;
  return inst;
}

double realized_snr_db(const MeasurementInstance& inst) {
  const double signal_energy = (inst.phi * inst.x.dense()).squaredNorm();
  const double noise_energy = inst.v.squaredNorm();
  if (noise_energy == 0.0) return kNoiseless;
  return 10.0 * std::log10(signal_energy / noise_energy);
}

Metrics compute_metrics(std::span<const TrialOutcome> trials, double snr_db) {
  if (trials.empty()) throw Error(ErrorCode::EmptyBatch, "no trials to summarize");
  const auto n = trials.front().x_true.size();
  std::size_t exact = 0;
  double mse_sum = 0.0;
  for (const auto& t : trials) {
    if (t.x_true.size() != n || t.x_hat.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent signal length across trials");
    }
    std::vector<Index> nonzero;
    for (Eigen::Index i = 0; i < n; ++i)
      if (t.x_true(i) != 0.0) nonzero.push_back(static_cast<Index>(i));
    if (SupportSet::from_indices(std::move(nonzero)) == t.support_hat) ++exact;
    mse_sum += (t.x_true - t.x_hat).squaredNorm() / static_cast<double>(n);
  }
  const double count = static_cast<double>(trials.size());
  return Metrics{static_cast<double>(exact) / count, mse_sum / count, snr_db};
}

namespace {

void write_row(std::ostream& os, const DenseVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v(i);
  }
  os << '\n';
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, "malformed number '" + cell + "' in instance file");
    }
  }
  return out;
}

std::string next_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, "truncated instance file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void expect_label(std::istream& is, const std::string& label) {
  if (next_line(is) != label) throw Error(ErrorCode::Io, "expected section '" + label + "'");
}

DenseVector vector_row(std::istream& is, Eigen::Index expected) {
  const auto values = parse_row(next_line(is));
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw Error(ErrorCode::Io, "vector row has the wrong length");
  }
  return Eigen::Map<const DenseVector>(values.data(), expected);
}

}  // namespace

void write_instance_csv(std::ostream& os, const MeasurementInstance& inst) {
  const auto old_precision = os.precision(17);
  os << "m,n,k,seed,snr_db\n";
  os << inst.phi.rows() << ',' << inst.phi.cols() << ',' << inst.x.k << ',' << inst.seed << ',';
  if (inst.noiseless()) os << "inf"; else os << inst.snr_db;
  os << "\nphi\n";
  for (Eigen::Index i = 0; i < inst.phi.rows(); ++i) write_row(os, inst.phi.row(i).transpose());
  os << "x\n";
  write_row(os, inst.x.dense());
  os << "v\n";
  write_row(os, inst.v);
  os << "y\n";
  write_row(os, inst.y);
  os.precision(old_precision);
}

MeasurementInstance read_instance_csv(std::istream& is) {
  if (next_line(is) != "m,n,k,seed,snr_db") throw Error(ErrorCode::Io, "missing instance header");
  std::stringstream header(next_line(is));
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(header, cell, ',')) cells.push_back(cell);
  if (cells.size() != 5) throw Error(ErrorCode::Io, "instance header needs five values");

  MeasurementInstance inst;
  Eigen::Index m = 0, n = 0;
  try {
    m = std::stol(cells[0]);
    n = std::stol(cells[1]);
    inst.seed = std::stoull(cells[3]);
    inst.snr_db = cells[4] == "inf" ? kNoiseless : std::stod(cells[4]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "malformed instance header");
  }
  if (m < 1 || n < 1) throw Error(ErrorCode::Io, "instance dimensions must be positive");

  expect_label(is, "phi");
  inst.phi.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) inst.phi.row(i) = vector_row(is, n).transpose();
  expect_label(is, "x");
  const DenseVector x = vector_row(is, n);
  expect_label(is, "v");
  inst.v = vector_row(is, m);
  expect_label(is, "y");
  inst.y = vector_row(is, m);

  std::vector<Index> support;
  std::vector<double> values;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) != 0.0) {
      support.push_back(static_cast<Index>(i));
      values.push_back(x(i));
    }
  }
  inst.x.n = static_cast<int>(n);
  inst.x.k = static_cast<int>(support.size());
  inst.x.support = SupportSet::from_indices(std::move(support));
  inst.x.values = std::move(values);
  return inst;
}

}  // namespace treemp
