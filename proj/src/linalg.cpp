#include "treemp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace treemp {

SupportSet::SupportSet(std::initializer_list<Index> indices)
    : SupportSet(from_indices(std::vector<Index>(indices))) {}

SupportSet SupportSet::from_indices(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw Error(ErrorCode::InvalidArgument, "support set contains duplicate indices");
  }
  if (!indices.empty() && indices.front() < 0) {
    throw Error(ErrorCode::InvalidArgument, "support set contains a negative index");
  }
  SupportSet s;
  s.indices_ = std::move(indices);
  return s;
}

SupportSet SupportSet::universe(Index n) {
  SupportSet s;
  s.indices_.resize(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(s.indices_.begin(), s.indices_.end(), 0);
  return s;
}

bool SupportSet::contains(Index j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

bool SupportSet::includes(const SupportSet& other) const {
  return std::includes(indices_.begin(), indices_.end(), other.indices_.begin(),
                       other.indices_.end());
}

SupportSet SupportSet::with(Index j) const {
  SupportSet s = *this;
  auto it = std::lower_bound(s.indices_.begin(), s.indices_.end(), j);
  if (it == s.indices_.end() || *it != j) s.indices_.insert(it, j);
  return s;
}

SupportSet SupportSet::unite(const SupportSet& other) const {
  SupportSet s;
  s.indices_.reserve(size() + other.size());
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(s.indices_));
  return s;
}

SupportSet SupportSet::minus(const SupportSet& other) const {
  SupportSet s;
  std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                      other.indices_.end(), std::back_inserter(s.indices_));
  return s;
}

SupportSet SupportSet::intersect(const SupportSet& other) const {
  SupportSet s;
  std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                        other.indices_.end(), std::back_inserter(s.indices_));
  return s;
}

void SupportSet::check_bounds(Index n) const {
  if (!indices_.empty() && indices_.back() >= n) {
    throw Error(ErrorCode::DimensionMismatch,
                "index " + std::to_string(indices_.back()) + " out of range for " +
                    std::to_string(n) + " columns");
  }
}

std::string SupportSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) os << ", ";
    os << indices_[i];
  }
  os << '}';
  return os.str();
}

std::size_t SupportSetHash::operator()(const SupportSet& s) const noexcept {
  // FNV-1a over the index values.
  std::size_t h = 1469598103934665603ull;
  for (Index j : s) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(j));
    h *= 1099511628211ull;
  }
  return h;
}

DenseMatrix gather_columns(const DenseMatrix& phi, const SupportSet& s) {
  s.check_bounds(static_cast<Index>(phi.cols()));
  DenseMatrix out(phi.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t c = 0; c < s.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = phi.col(s[c]);
  return out;
}

namespace {

void check_system(const DenseMatrix& phi, const DenseVector& y, const SupportSet& s) {
  if (y.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement length does not match matrix rows");
  }
  if (static_cast<Eigen::Index>(s.size()) > phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "support larger than the number of measurements");
  }
  s.check_bounds(static_cast<Index>(phi.cols()));
}

// ||R||_1 * ||R^-1||_1 for an upper-triangular R.
double triangular_condition(const Eigen::Ref<const DenseMatrix>& r) {
  const auto n = r.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) == 0.0) return std::numeric_limits<double>::infinity();
  }
  DenseMatrix inv = r.triangularView<Eigen::Upper>().solve(DenseMatrix::Identity(n, n));
  const double norm_r = r.triangularView<Eigen::Upper>().toDenseMatrix().cwiseAbs().colwise().sum().maxCoeff();
  const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
  return norm_r * norm_inv;
}

}  // namespace

DenseVector least_squares_on_support(const DenseMatrix& phi, const DenseVector& y,
                                     const SupportSet& s) {
  check_system(phi, y, s);
  if (s.empty()) return DenseVector(0);
  const DenseMatrix a = gather_columns(phi, s);
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  const auto k = a.cols();
  const double cond = triangular_condition(qr.matrixQR().topLeftCorner(k, k));
  if (!(cond < kMaxCondition)) {
    throw Error(ErrorCode::RankDeficient,
                "columns " + s.to_string() + " are numerically rank deficient");
  }
  return qr.solve(y);
}

DenseVector residual(const DenseMatrix& phi, const DenseVector& y, const SupportSet& s) {
  check_system(phi, y, s);
  if (s.empty()) return y;
  const DenseVector c = least_squares_on_support(phi, y, s);
  DenseVector r = y;
  for (std::size_t i = 0; i < s.size(); ++i) r.noalias() -= c(static_cast<Eigen::Index>(i)) * phi.col(s[i]);
  return r;
}

std::vector<Correlation> correlations(const DenseMatrix& phi, const DenseVector& r,
                                      const SupportSet& candidates) {
  if (r.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "residual length does not match matrix rows");
  }
  candidates.check_bounds(static_cast<Index>(phi.cols()));
  std::vector<Correlation> out;
  out.reserve(candidates.size());
  for (Index j : candidates) out.push_back({j, std::abs(phi.col(j).dot(r))});
  return out;
}

SupportSet top_k_by_magnitude(std::span<const Correlation> pairs, std::size_t k) {
  if (k > pairs.size()) {
    throw Error(ErrorCode::InsufficientCandidates,
                "requested " + std::to_string(k) + " indices from " +
                    std::to_string(pairs.size()) + " candidates");
  }
  std::vector<Correlation> sorted(pairs.begin(), pairs.end());
  auto before = [](const Correlation& a, const Correlation& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.index < b.index;
  };
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(),
                    before);
  std::vector<Index> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) picked.push_back(sorted[i].index);
  return SupportSet::from_indices(std::move(picked));
}

IncrementalProjector::IncrementalProjector(const DenseMatrix& phi, const DenseVector& y,
                                           const DenseMatrix* gram)
    : phi_(&phi), gram_(gram), residual_(y) {
  if (y.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement length does not match matrix rows");
  }
  if (gram) {
    if (gram->rows() != phi.cols() || gram->cols() != phi.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "Gram matrix does not match the column count");
    }
    correlations_ = phi.transpose() * y;
  }
}

IncrementalProjector::Direction IncrementalProjector::orthogonalized(Index j) const {
  if (j < 0 || j >= phi_->cols()) {
    throw Error(ErrorCode::DimensionMismatch, "column index out of range");
  }
  const auto m = phi_->rows();
  const auto size = static_cast<Eigen::Index>(columns_.size());
  if (size >= m) {
    throw Error(ErrorCode::DimensionMismatch, "support larger than the number of measurements");
  }
  Direction d;
  d.q = phi_->col(j);
  d.coeffs = DenseVector::Zero(size);
  const double original = d.q.norm();
  double remaining = original;
  if (size > 0) {
    const Eigen::Map<const DenseMatrix> basis(basis_.data(), m, size);
    for (int pass = 0; pass < 2; ++pass) {
      const double before = remaining;
      const DenseVector h = basis.transpose() * d.q;
      d.q.noalias() -= basis * h;
      d.coeffs += h;
      remaining = d.q.norm();
      if (remaining > 0.5 * before) break;
    }
  }
  if (!(remaining > original / kMaxCondition)) {
    throw Error(ErrorCode::RankDeficient,
                "column " + std::to_string(j) + " lies in the span of the current support");
  }
  d.q /= remaining;
  d.scale = remaining;
  return d;
}

DenseVector IncrementalProjector::residual_if_pushed(Index j) const {
  const Direction d = orthogonalized(j);
  return residual_ - d.q * d.q.dot(residual_);
}

namespace {

void append(std::vector<double>& store, const DenseVector& column, std::size_t capacity) {
  if (store.capacity() < store.size() + static_cast<std::size_t>(column.size())) store.reserve(capacity);
  store.insert(store.end(), column.data(), column.data() + column.size());
}

}  // namespace

void IncrementalProjector::rollback(const Checkpoint& cp) {
  if (cp.size > columns_.size()) {
    throw Error(ErrorCode::InvalidArgument, "checkpoint is newer than the projector state");
  }
  columns_.resize(cp.size);
  basis_.resize(cp.size * static_cast<std::size_t>(phi_->rows()));
  if (gram_) projected_.resize(cp.size * static_cast<std::size_t>(phi_->cols()));
  residual_ = cp.residual;
  correlations_ = cp.correlations;
}

void IncrementalProjector::push(Index j) {
  const Direction d = orthogonalized(j);
  const double alpha = d.q.dot(residual_);
  residual_ -= alpha * d.q;
  const auto m = phi_->rows();
  append(basis_, d.q, static_cast<std::size_t>(m * m));
  if (gram_) {
    // phi' q = (phi' phi_j - (phi' basis) coeffs) / scale
    const auto n = phi_->cols();
    DenseVector pq = gram_->col(j);
    if (!columns_.empty()) {
      const Eigen::Map<const DenseMatrix> projected(projected_.data(), n,
                                                    static_cast<Eigen::Index>(columns_.size()));
      pq.noalias() -= projected * d.coeffs;
    }
    pq /= d.scale;
    correlations_ -= alpha * pq;
    append(projected_, pq, static_cast<std::size_t>(n * m));
  }
  columns_.push_back(j);
}

}  // namespace treemp
