#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "treemp/error.hpp"

namespace treemp {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

/// Column index into the sensing matrix. Indices are 0-based everywhere.
using Index = int;

/// Sorted, duplicate-free set of column indices. The sorted list is the
/// canonical (and serialized) form, so two equal sets compare equal and
/// hash equal regardless of how they were built.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<Index> indices);

  /// Sorts the input. Throws InvalidArgument on duplicates or negative indices.
  static SupportSet from_indices(std::vector<Index> indices);

  /// {0, 1, ..., n-1}
  static SupportSet universe(Index n);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(Index j) const;
  bool includes(const SupportSet& other) const;

  SupportSet with(Index j) const;
  SupportSet unite(const SupportSet& other) const;
  SupportSet minus(const SupportSet& other) const;
  SupportSet intersect(const SupportSet& other) const;

  /// Throws DimensionMismatch if any index is >= n.
  void check_bounds(Index n) const;

  /// "{1, 4, 7}"
  std::string to_string() const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;
  friend auto operator<=>(const SupportSet& a, const SupportSet& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<Index> indices_;
};

struct SupportSetHash {
  std::size_t operator()(const SupportSet& s) const noexcept;
};

struct Correlation {
  Index index;
  double value;
};

/// Columns of `phi` listed in `s`, in ascending index order.
DenseMatrix gather_columns(const DenseMatrix& phi, const SupportSet& s);

/// Coefficients c minimizing ||y - phi_s c||_2, computed with a Householder
/// QR of the gathered columns. Rejects submatrices whose 1-norm condition
/// number reaches kMaxCondition.
DenseVector least_squares_on_support(const DenseMatrix& phi, const DenseVector& y,
                                     const SupportSet& s);

/// y - phi_s * least_squares_on_support(phi, y, s); y itself when s is empty.
DenseVector residual(const DenseMatrix& phi, const DenseVector& y, const SupportSet& s);

/// |phi_j' r| for every j in `candidates`, in candidate order.
std::vector<Correlation> correlations(const DenseMatrix& phi, const DenseVector& r,
                                      const SupportSet& candidates);

/// Indices of the k largest values; equal values prefer the smaller index.
SupportSet top_k_by_magnitude(std::span<const Correlation> pairs, std::size_t k);

inline constexpr double kMaxCondition = 1e12;

/// Orthonormal basis of a growing column set together with the projection
/// residual of y onto its complement. Classical Gram-Schmidt, with a second
/// pass whenever the first one cancels more than half of the column norm.
///
/// When constructed with the Gram matrix phi' phi, the correlations phi' r are
/// kept up to date at O(N |s|) per push instead of O(N M).
class IncrementalProjector {
 public:
  IncrementalProjector(const DenseMatrix& phi, const DenseVector& y,
                       const DenseMatrix* gram = nullptr);

  /// Appends column j. Throws RankDeficient if it is numerically dependent on
  /// the columns already present.
  void push(Index j);

  /// Residual that push(j) would produce, without modifying the basis.
  DenseVector residual_if_pushed(Index j) const;

  /// Saved state for undoing pushes exactly (no downdating arithmetic).
  struct Checkpoint {
    std::size_t size = 0;
    DenseVector residual;
    DenseVector correlations;
  };
  Checkpoint checkpoint() const { return {columns_.size(), residual_, correlations_}; }
  /// Drops every column pushed after `cp` was taken.
  void rollback(const Checkpoint& cp);

  const DenseVector& residual() const noexcept { return residual_; }
  /// phi' residual(); only valid when a Gram matrix was supplied.
  const DenseVector& correlations() const noexcept { return correlations_; }
  bool tracks_correlations() const noexcept { return gram_ != nullptr; }
  const std::vector<Index>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }

 private:
  struct Direction {
    DenseVector q;       // unit vector
    DenseVector coeffs;  // phi_j = basis * coeffs + scale * q
    double scale = 0.0;
  };
  Direction orthogonalized(Index j) const;

  const DenseMatrix* phi_;
  const DenseMatrix* gram_;
  std::vector<double> basis_;      // orthonormal columns, column-major, M rows each
  std::vector<double> projected_;  // phi' q for each basis column, N rows each
  DenseVector residual_;
  DenseVector correlations_;
  std::vector<Index> columns_;
};

}  // namespace treemp
