#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "treemp/linalg.hpp"

namespace treemp {

enum class PreselectionMethod {
  gomp,          // generalized OMP, l indices per iteration
  omp_extended,  // plain OMP run past k iterations
  full,          // every column index (no pre-selection)
};

struct PreselectionResult {
  SupportSet theta;
  std::vector<Index> order;  // selection order of theta
  int l = 1;
  PreselectionMethod method = PreselectionMethod::gomp;
};

/// Tree-search counters. `paths_evaluated` counts noncausal completions that
/// were actually computed.
struct TreeStats {
  std::size_t paths_evaluated = 0;
  std::size_t pruned = 0;
  std::size_t duplicates_skipped = 0;
  std::size_t candidates_collapsed = 0;
  std::size_t layers_completed = 0;
  std::size_t preselection_size = 0;
  std::vector<std::size_t> survivors_per_layer;
  std::vector<double> epsilon_per_layer;  // threshold in force while layer i ran
  double min_candidate_residual = std::numeric_limits<double>::infinity();
};

struct RecoveryResult {
  SupportSet support;
  DenseVector x_hat;  // length N, zero off the support
  double residual_norm = 0.0;
  std::optional<TreeStats> stats;
};

struct TmpConfig {
  int k = 1;
  int l = 2;
  double epsilon_init = std::numeric_limits<double>::infinity();
  std::optional<int> n_max;
  int preselection_size = 0;  // 0 means 2k
  PreselectionMethod preselection = PreselectionMethod::gomp;
  // Noncausal set chosen one index at a time with a refit after each pick.
  bool iterative_completion = true;
  // Within a layer only the first surviving path per distinct candidate is kept.
  bool collapse_equal_candidates = true;

  int effective_preselection_size() const { return preselection_size > 0 ? preselection_size : 2 * k; }
  void validate() const;
};

struct SearchPath {
  std::vector<Index> causal;  // in the order the tree added them
  SupportSet key;             // canonical form of `causal`

  static SearchPath from_order(std::vector<Index> causal);
  SearchPath extended(Index j) const;
};

struct PathEvaluation {
  SearchPath path;
  SupportSet noncausal;
  SupportSet candidate;
  double candidate_residual_norm = 0.0;
};

/// Survivors and thresholds of one completed layer, captured when a trace is
/// requested.
struct LayerTrace {
  int layer = 0;
  double epsilon_in = 0.0;
  double epsilon_out = 0.0;
  std::vector<SearchPath> survivors;
  std::vector<double> survivor_residuals;
  std::vector<SupportSet> survivor_candidates;
};

struct TmpTrace {
  PreselectionResult preselection;
  std::vector<LayerTrace> layers;
  std::vector<double> evaluated_residuals;  // every candidate residual, in evaluation order
};

/// Least-squares estimate on `support`, scattered into a length-N vector.
RecoveryResult fit_on_support(const DenseMatrix& phi, const DenseVector& y, const SupportSet& support);

/// Standard OMP. Returns the selected indices in selection order.
std::vector<Index> omp(const DenseMatrix& phi, const DenseVector& y, int iterations);

/// Generalized OMP: l indices per iteration for at most k iterations, stopping
/// early once ||r|| <= 1e-10 ||y||.
PreselectionResult gomp(const DenseMatrix& phi, const DenseVector& y, int k, int l);

/// CoSaMP with refit-free pruning; stops at max_iterations or when the
/// residual norm changes by less than 1e-7 relative. For y = 0 the first
/// iterate is {0, ..., k-1}.
SupportSet cosamp(const DenseMatrix& phi, const DenseVector& y, int k, int max_iterations = 40);

RecoveryResult oracle_estimator(const DenseMatrix& phi, const DenseVector& y, const SupportSet& t);

/// Pre-selection stage of TMP, truncated to config.effective_preselection_size()
/// in selection order.
PreselectionResult preselect(const DenseMatrix& phi, const DenseVector& y, const TmpConfig& config);

/// Completes `path` to k indices with the k - |path| columns outside the path
/// that correlate most with the path residual, and scores the result.
PathEvaluation noncausal_completion(const DenseMatrix& phi, const DenseVector& y,
                                    const SearchPath& path, int k, bool iterative = false);

/// Tree search with pruning over an existing pre-selection.
RecoveryResult tree_search(const DenseMatrix& phi, const DenseVector& y,
                           const PreselectionResult& preselection, const TmpConfig& config,
                           TmpTrace* trace = nullptr);

/// Pre-selection followed by tree search.
RecoveryResult tmp(const DenseMatrix& phi, const DenseVector& y, const TmpConfig& config,
                   TmpTrace* trace = nullptr);

struct ExhaustiveResult {
  SupportSet support;
  double residual_norm = 0.0;
  double runner_up_residual_norm = std::numeric_limits<double>::infinity();
};

inline constexpr std::uint64_t kMaxEnumeration = 1'000'000;

/// Number of k-subsets of n items, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

/// Minimum-residual support of size k over all (N choose k) supports; ties go
/// to the lexicographically smallest support.
ExhaustiveResult exhaustive_l0_scan(const DenseMatrix& phi, const DenseVector& y, int k);
SupportSet exhaustive_l0(const DenseMatrix& phi, const DenseVector& y, int k);

}  // namespace treemp
