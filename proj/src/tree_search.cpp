#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "treemp/recovery.hpp"

namespace treemp {

void TmpConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "sparsity k must be at least 1");
  if (l < 1) throw Error(ErrorCode::InvalidConfig, "selection width l must be at least 1");
  if (n_max && *n_max < 1) throw Error(ErrorCode::InvalidConfig, "n_max must be at least 1");
  if (preselection_size < 0 || (preselection_size > 0 && preselection_size < k)) {
    throw Error(ErrorCode::InvalidConfig, "preselection size must be at least k");
  }
  if (std::isnan(epsilon_init) || epsilon_init < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "initial threshold must be nonnegative");
  }
}

SearchPath SearchPath::from_order(std::vector<Index> causal) {
  SearchPath p;
  p.key = SupportSet::from_indices(causal);
  p.causal = std::move(causal);
  return p;
}

SearchPath SearchPath::extended(Index j) const {
  SearchPath p;
  p.causal = causal;
  p.causal.push_back(j);
  p.key = key.with(j);
  return p;
}

namespace {

// The `count` columns outside `exclude` with the largest |phi_j' r|; equal
// magnitudes prefer the smaller index.
SupportSet top_correlated(const DenseMatrix& phi, const DenseVector& r, const SupportSet& exclude,
                          int count, std::vector<Index>& scratch) {
  if (count <= 0) return {};
  const DenseVector c = (phi.transpose() * r).cwiseAbs();
  scratch.clear();
  for (Index j = 0; j < c.size(); ++j)
    if (!exclude.contains(j)) scratch.push_back(j);
  if (static_cast<int>(scratch.size()) < count) {
    throw Error(ErrorCode::InsufficientCandidates, "not enough columns to complete the path");
  }
  auto before = [&](Index a, Index b) {
    if (c(a) != c(b)) return c(a) > c(b);
    return a < b;
  };
  std::partial_sort(scratch.begin(), scratch.begin() + count, scratch.end(), before);
  return SupportSet::from_indices(
      std::vector<Index>(scratch.begin(), scratch.begin() + count));
}

// Greedy one-at-a-time completion: each step refits before picking the next
// index. `proj` holds the causal columns on entry and the full candidate on exit.
SupportSet iterated_completion(const DenseMatrix& phi, IncrementalProjector& proj,
                               const SupportSet& causal, int count) {
  std::vector<char> taken(static_cast<std::size_t>(phi.cols()), 0);
  for (Index j : causal) taken[static_cast<std::size_t>(j)] = 1;
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  DenseVector c(phi.cols());
  for (int step = 0; step < count; ++step) {
    if (proj.tracks_correlations()) c = proj.correlations();
    else c.noalias() = phi.transpose() * proj.residual();
    Index best = -1;
    double best_value = -1.0;
    for (Index j = 0; j < c.size(); ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double v = std::abs(c(j));
      if (v > best_value) {
        best_value = v;
        best = j;
      }
    }
    if (best < 0) throw Error(ErrorCode::InsufficientCandidates, "not enough columns to complete the path");
    proj.push(best);
    taken[static_cast<std::size_t>(best)] = 1;
    chosen.push_back(best);
  }
  return SupportSet::from_indices(std::move(chosen));
}

// Residual norms of full-size candidates. The value depends only on the
// candidate set (columns are gathered in ascending order), so equal
// candidates reached through different paths score identically.
class CandidateScorer {
 public:
  CandidateScorer(const DenseMatrix& phi, const DenseVector& y) : phi_(phi), y_(y) {}

  // `known` is an already computed residual norm of the candidate; the first
  // value recorded for a set is the one every later lookup sees.
  double operator()(const SupportSet& candidate, std::optional<double> known = std::nullopt) {
    auto it = cache_.find(candidate);
    if (it != cache_.end()) return it->second;
    const double norm = known ? *known : residual(phi_, y_, candidate).norm();
    cache_.emplace(candidate, norm);
    return norm;
  }

 private:
  const DenseMatrix& phi_;
  const DenseVector& y_;
  std::unordered_map<SupportSet, double, SupportSetHash> cache_;
};

struct Survivor {
  SearchPath path;
  SupportSet candidate;
  double residual = 0.0;
};

// Keeps the n_max survivors with the smallest candidate residual (ties by
// canonical key), preserving insertion order among those kept.
void cap_survivors(std::vector<Survivor>& layer, std::size_t n_max) {
  if (layer.size() <= n_max) return;
  std::vector<std::size_t> rank(layer.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (layer[a].residual != layer[b].residual) return layer[a].residual < layer[b].residual;
    return layer[a].path.key < layer[b].path.key;
  });
  std::vector<bool> keep(layer.size(), false);
  for (std::size_t i = 0; i < n_max; ++i) keep[rank[i]] = true;
  std::vector<Survivor> kept;
  kept.reserve(n_max);
  for (std::size_t i = 0; i < layer.size(); ++i)
    if (keep[i]) kept.push_back(std::move(layer[i]));
  layer = std::move(kept);
}

}  // namespace

PathEvaluation noncausal_completion(const DenseMatrix& phi, const DenseVector& y,
                                    const SearchPath& path, int k, bool iterative) {
  const int depth = static_cast<int>(path.causal.size());
  if (depth > k) throw Error(ErrorCode::InvalidArgument, "path is deeper than the sparsity");
  if (k > phi.rows()) throw Error(ErrorCode::DimensionMismatch, "sparsity exceeds the number of rows");
  path.key.check_bounds(static_cast<Index>(phi.cols()));

  std::vector<Index> scratch;
  PathEvaluation out;
  out.path = path;
  if (iterative) {
    IncrementalProjector proj(phi, y);
    for (Index j : path.causal) proj.push(j);
    out.noncausal = iterated_completion(phi, proj, path.key, k - depth);
  } else {
    const DenseVector r = residual(phi, y, path.key);
    out.noncausal = top_correlated(phi, r, path.key, k - depth, scratch);
  }
  out.candidate = path.key.unite(out.noncausal);
  out.candidate_residual_norm = residual(phi, y, out.candidate).norm();
  return out;
}

RecoveryResult tree_search(const DenseMatrix& phi, const DenseVector& y,
                           const PreselectionResult& preselection, const TmpConfig& config,
                           TmpTrace* trace) {
  config.validate();
  const int k = config.k;
  if (y.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement length does not match matrix rows");
  }
  if (k > phi.rows()) throw Error(ErrorCode::DimensionMismatch, "sparsity exceeds the number of rows");
  preselection.theta.check_bounds(static_cast<Index>(phi.cols()));
  if (static_cast<int>(preselection.theta.size()) < k) {
    throw Error(ErrorCode::EmptyPreselection,
                "pre-selection returned " + std::to_string(preselection.theta.size()) +
                    " indices for sparsity " + std::to_string(k));
  }
  if (trace) {
    trace->preselection = preselection;
    trace->layers.clear();
    trace->evaluated_residuals.clear();
  }

  TreeStats stats;
  stats.preselection_size = preselection.theta.size();
  CandidateScorer score(phi, y);
  std::vector<Index> scratch;
  DenseMatrix gram;
  if (config.iterative_completion) gram.noalias() = phi.transpose() * phi;
  const DenseMatrix* gram_ptr = config.iterative_completion ? &gram : nullptr;

  std::vector<Survivor> survivors(1);  // the empty root path
  double epsilon = config.epsilon_init;
  std::optional<SupportSet> incumbent;
  // Fallback when a finite initial threshold rejects every candidate.
  SupportSet best_seen;

  for (int layer = 1; layer <= k; ++layer) {
    double next_epsilon = epsilon;
    std::vector<Survivor> next;
    std::unordered_set<SupportSet, SupportSetHash> kept_keys;
    std::unordered_set<SupportSet, SupportSetHash> pruned_keys;
    std::unordered_set<SupportSet, SupportSetHash> claimed;
    const int remaining = k - layer;

    for (const Survivor& parent : survivors) {
      IncrementalProjector proj(phi, y, gram_ptr);
      for (Index j : parent.path.causal) proj.push(j);
      const IncrementalProjector::Checkpoint at_parent = proj.checkpoint();

      for (Index j : preselection.theta) {
        if (parent.path.key.contains(j)) continue;
        SearchPath child = parent.path.extended(j);
        // A pruned key is skipped as well: its completion, and therefore the
        // comparison against the fixed layer threshold, depends only on the set.
        if (kept_keys.contains(child.key) || pruned_keys.contains(child.key)) {
          ++stats.duplicates_skipped;
          continue;
        }

        SupportSet noncausal;
        std::optional<double> known;
        if (config.iterative_completion) {
          proj.push(j);
          noncausal = iterated_completion(phi, proj, child.key, remaining);
          known = proj.residual().norm();
          proj.rollback(at_parent);
        } else if (remaining > 0) {
          noncausal = top_correlated(phi, proj.residual_if_pushed(j), child.key, remaining, scratch);
        }
        SupportSet candidate = child.key.unite(noncausal);
        const double norm = score(candidate, known);
        ++stats.paths_evaluated;
        if (trace) trace->evaluated_residuals.push_back(norm);
        if (norm < stats.min_candidate_residual) {
          stats.min_candidate_residual = norm;
          best_seen = candidate;
        }

        if (norm <= epsilon && config.collapse_equal_candidates &&
            !claimed.insert(candidate).second) {
          // Same full candidate as an earlier survivor of this layer.
          ++stats.candidates_collapsed;
        } else if (norm <= epsilon) {
          if (norm <= next_epsilon) {
            next_epsilon = norm;
            incumbent = candidate;
          }
          kept_keys.insert(child.key);
          next.push_back(Survivor{std::move(child), std::move(candidate), norm});
        } else {
          ++stats.pruned;
          pruned_keys.insert(std::move(child.key));
        }
      }
    }

    stats.epsilon_per_layer.push_back(epsilon);
    if (next.empty()) break;
    if (config.n_max) cap_survivors(next, static_cast<std::size_t>(*config.n_max));
    stats.survivors_per_layer.push_back(next.size());
    stats.layers_completed = static_cast<std::size_t>(layer);
    if (trace) {
      LayerTrace lt;
      lt.layer = layer;
      lt.epsilon_in = epsilon;
      lt.epsilon_out = next_epsilon;
      for (const auto& s : next) {
        lt.survivors.push_back(s.path);
        lt.survivor_residuals.push_back(s.residual);
        lt.survivor_candidates.push_back(s.candidate);
      }
      trace->layers.push_back(std::move(lt));
    }
    survivors = std::move(next);
    epsilon = next_epsilon;
  }

  RecoveryResult out = fit_on_support(phi, y, incumbent ? *incumbent : best_seen);
  out.stats = std::move(stats);
  return out;
}

RecoveryResult tmp(const DenseMatrix& phi, const DenseVector& y, const TmpConfig& config,
                   TmpTrace* trace) {
  const PreselectionResult pre = preselect(phi, y, config);
  return tree_search(phi, y, pre, config, trace);
}

}  // namespace treemp
