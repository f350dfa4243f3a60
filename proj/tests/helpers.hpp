#pragma once

#include <algorithm>
#include <random>

#include "treemp/linalg.hpp"

namespace treemp::test {

inline DenseMatrix random_matrix(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = g(rng);
  return a;
}

inline DenseVector random_vector(int n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

// Orthonormal n x n via QR of a Gaussian matrix.
inline DenseMatrix orthonormal(int n, std::uint64_t seed) {
  Eigen::HouseholderQR<DenseMatrix> qr(random_matrix(n, n, seed));
  return qr.householderQ() * DenseMatrix::Identity(n, n);
}

inline SupportSet random_subset(int n, int size, std::mt19937_64& rng) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(size));
  return SupportSet::from_indices(all);
}

}  // namespace treemp::test
