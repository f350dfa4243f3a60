#include "treemp/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace treemp {

namespace {

void check_measurement(const DenseMatrix& phi, const DenseVector& y) {
  if (y.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement length does not match matrix rows");
  }
}

// Indices of the `count` largest |c_j| with j not yet selected; ties prefer
// the smaller index.
std::vector<Index> largest_unselected(const DenseVector& c, const std::vector<bool>& selected,
                                      int count) {
  std::vector<Index> pool;
  pool.reserve(static_cast<std::size_t>(c.size()));
  for (Index j = 0; j < c.size(); ++j)
    if (!selected[static_cast<std::size_t>(j)]) pool.push_back(j);
  if (static_cast<int>(pool.size()) < count) {
    throw Error(ErrorCode::InsufficientCandidates, "not enough unselected columns left");
  }
  auto before = [&](Index a, Index b) {
    const double va = std::abs(c(a)), vb = std::abs(c(b));
    if (va != vb) return va > vb;
    return a < b;
  };
  std::partial_sort(pool.begin(), pool.begin() + count, pool.end(), before);
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

RecoveryResult fit_on_support(const DenseMatrix& phi, const DenseVector& y,
                              const SupportSet& support) {
  const DenseVector c = least_squares_on_support(phi, y, support);
  RecoveryResult out;
  out.support = support;
  out.x_hat = DenseVector::Zero(phi.cols());
  DenseVector r = y;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto ci = c(static_cast<Eigen::Index>(i));
    out.x_hat(support[i]) = ci;
    r.noalias() -= ci * phi.col(support[i]);
  }
  out.residual_norm = r.norm();
  return out;
}

std::vector<Index> omp(const DenseMatrix& phi, const DenseVector& y, int iterations) {
  check_measurement(phi, y);
  if (iterations < 0 || iterations > phi.rows() || iterations > phi.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "OMP iteration count exceeds the matrix size");
  }
  IncrementalProjector proj(phi, y);
  std::vector<bool> selected(static_cast<std::size_t>(phi.cols()), false);
  for (int it = 0; it < iterations; ++it) {
    const DenseVector c = phi.transpose() * proj.residual();
    const Index j = largest_unselected(c, selected, 1).front();
    proj.push(j);
    selected[static_cast<std::size_t>(j)] = true;
  }
  return proj.columns();
}

PreselectionResult gomp(const DenseMatrix& phi, const DenseVector& y, int k, int l) {
  check_measurement(phi, y);
  if (l < 1 || k < 0) throw Error(ErrorCode::InvalidArgument, "gOMP needs l >= 1 and k >= 0");
  IncrementalProjector proj(phi, y);
  std::vector<bool> selected(static_cast<std::size_t>(phi.cols()), false);
  const double stop = 1e-10 * y.norm();
  for (int it = 0; it < k; ++it) {
    if (proj.residual().norm() <= stop) break;
    if (static_cast<Eigen::Index>(proj.size()) + l > phi.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "gOMP selection would exceed the number of rows");
    }
    const DenseVector c = phi.transpose() * proj.residual();
    for (Index j : largest_unselected(c, selected, l)) {
      proj.push(j);
      selected[static_cast<std::size_t>(j)] = true;
    }
  }
  PreselectionResult out;
  out.order = proj.columns();
  out.theta = SupportSet::from_indices(out.order);
  out.l = l;
  out.method = PreselectionMethod::gomp;
  return out;
}

SupportSet cosamp(const DenseMatrix& phi, const DenseVector& y, int k, int max_iterations) {
  check_measurement(phi, y);
  if (k < 1 || 3 * k > phi.rows() || 2 * k > phi.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "CoSaMP needs 3k <= M and 2k <= N");
  }
  const auto n = static_cast<Index>(phi.cols());
  SupportSet support;
  DenseVector r = y;
  double previous = r.norm();
  const double floor = 1e-10 * y.norm();
  for (int it = 0; it < max_iterations; ++it) {
    const DenseVector c = phi.transpose() * r;
    std::vector<Correlation> proxy;
    proxy.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) proxy.push_back({j, std::abs(c(j))});
    const SupportSet merged = top_k_by_magnitude(proxy, static_cast<std::size_t>(2 * k)).unite(support);

    const DenseVector b = least_squares_on_support(phi, y, merged);
    std::vector<Correlation> magnitudes;
    magnitudes.reserve(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i)
      magnitudes.push_back({merged[i], std::abs(b(static_cast<Eigen::Index>(i)))});
    support = top_k_by_magnitude(magnitudes, static_cast<std::size_t>(k));

    r = y;
    for (std::size_t i = 0; i < merged.size(); ++i)
      if (support.contains(merged[i])) r.noalias() -= b(static_cast<Eigen::Index>(i)) * phi.col(merged[i]);
    const double current = r.norm();
    if (current <= floor) break;
    if (std::abs(previous - current) < 1e-7 * previous) break;
    previous = current;
  }
  return support;
}

RecoveryResult oracle_estimator(const DenseMatrix& phi, const DenseVector& y, const SupportSet& t) {
  return fit_on_support(phi, y, t);
}

PreselectionResult preselect(const DenseMatrix& phi, const DenseVector& y, const TmpConfig& config) {
  config.validate();
  const int size = config.effective_preselection_size();
  PreselectionResult out;
  switch (config.preselection) {
    case PreselectionMethod::gomp: {
      out = gomp(phi, y, (size + config.l - 1) / config.l, config.l);
      break;
    }
    case PreselectionMethod::omp_extended: {
      out.order = omp(phi, y, size);
      out.l = 1;
      break;
    }
    case PreselectionMethod::full: {
      out.order = SupportSet::universe(static_cast<Index>(phi.cols())).indices();
      out.l = 0;
      break;
    }
  }
  out.method = config.preselection;
  if (config.preselection != PreselectionMethod::full &&
      static_cast<int>(out.order.size()) > size) {
    out.order.resize(static_cast<std::size_t>(size));
  }
  out.theta = SupportSet::from_indices(out.order);
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    // result * num / i stays exact because result * num is divisible by i.
    if (result > UINT64_MAX / num) return UINT64_MAX;
    result = result * num / static_cast<std::uint64_t>(i);
  }
  return result;
}

ExhaustiveResult exhaustive_l0_scan(const DenseMatrix& phi, const DenseVector& y, int k) {
  check_measurement(phi, y);
  const int n = static_cast<int>(phi.cols());
  if (k < 0 || k > n || k > phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "exhaustive search order out of range");
  }
  if (binomial(n, k) > kMaxEnumeration) {
    throw Error(ErrorCode::TooLarge, "too many supports to enumerate");
  }
  ExhaustiveResult best;
  best.residual_norm = std::numeric_limits<double>::infinity();
  std::vector<Index> combo(static_cast<std::size_t>(k));
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    const SupportSet s = SupportSet::from_indices(combo);
    const double norm = residual(phi, y, s).norm();
    if (norm < best.residual_norm) {
      best.runner_up_residual_norm = best.residual_norm;
      best.residual_norm = norm;
      best.support = s;
    } else if (norm < best.runner_up_residual_norm) {
      best.runner_up_residual_norm = norm;
    }
    // Next combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

SupportSet exhaustive_l0(const DenseMatrix& phi, const DenseVector& y, int k) {
  return exhaustive_l0_scan(phi, y, k).support;
}

}  // namespace treemp
