#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "treemp/error.hpp"
#include "treemp/recovery.hpp"
#include "treemp/signals.hpp"

using namespace treemp;
using namespace treemp::test;

namespace {

TmpConfig config_for(int k) {
  TmpConfig c;
  c.k = k;
  return c;
}

std::vector<TmpConfig> variants(int k) {
  std::vector<TmpConfig> out;
  for (bool iterative : {false, true})
    for (bool collapse : {false, true}) {
      TmpConfig c = config_for(k);
      c.iterative_completion = iterative;
      c.collapse_equal_candidates = collapse;
      out.push_back(c);
    }
  return out;
}

}  // namespace

TEST_SUITE("tree_search") {

TEST_CASE("config validation") {
  TmpConfig c = config_for(3);
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_preselection_size() == 6);
  c.n_max = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = config_for(3);
  c.preselection_size = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = config_for(0);
  CHECK_THROWS_AS(c.validate(), Error);
  c = config_for(2);
  c.epsilon_init = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("search paths keep order and canonical key") {
  const SearchPath p = SearchPath::from_order({9, 2}).extended(5);
  CHECK(p.causal == std::vector<Index>{9, 2, 5});
  CHECK(p.key == SupportSet{2, 5, 9});
}

TEST_CASE("noncausal completion: worked correlation order") {
  const DenseMatrix eye = DenseMatrix::Identity(12, 12);
  DenseVector y = DenseVector::Zero(12);
  y(0) = 1.0;
  y(1) = 1.0;
  y(5) = 0.5;
  y(7) = 0.9;
  y(9) = 0.1;
  y(11) = 0.6;
  const SearchPath path = SearchPath::from_order({0, 1});
  for (bool iterative : {false, true}) {
    const PathEvaluation e = noncausal_completion(eye, y, path, 4, iterative);
    CHECK(e.noncausal == SupportSet{7, 11});
    CHECK(e.candidate == SupportSet{0, 1, 7, 11});
    CHECK(e.candidate_residual_norm == doctest::Approx(std::sqrt(0.25 + 0.01)));
  }
  const PathEvaluation full = noncausal_completion(eye, y, SearchPath::from_order({3, 0}), 2);
  CHECK(full.noncausal.empty());
  CHECK(full.candidate == SupportSet{0, 3});
  CHECK_THROWS_AS(noncausal_completion(eye, y, SearchPath::from_order({3, 0, 1}), 2), Error);
}

TEST_CASE("noncausal completion matches a from-scratch recomputation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MeasurementInstance inst = make_instance(30, 60, 6, 25.0, seed);
    const Index other = inst.x.support[0] == 3 ? 4 : 3;
    const SearchPath path = SearchPath::from_order({inst.x.support[0], other});
    const PathEvaluation e = noncausal_completion(inst.phi, inst.y, path, 6);
    // Oracle: top 4 of |phi_j' r| outside the path, by plain scan.
    const DenseVector r = residual(inst.phi, inst.y, path.key);
    std::vector<std::pair<double, Index>> scan;
    for (Index j = 0; j < 60; ++j)
      if (!path.key.contains(j)) scan.push_back({-std::abs(inst.phi.col(j).dot(r)), j});
    std::sort(scan.begin(), scan.end());
    std::vector<Index> top;
    for (int i = 0; i < 4; ++i) top.push_back(scan[static_cast<std::size_t>(i)].second);
    CHECK(e.noncausal == SupportSet::from_indices(top));
    CHECK(e.candidate_residual_norm ==
          doctest::Approx(residual(inst.phi, inst.y, e.candidate).norm()).epsilon(1e-10));
    CHECK(e.candidate.includes(path.key));
    CHECK(e.candidate.size() == 6u);
  }
}

TEST_CASE("depth-one tree") {
  const DenseMatrix phi = gen_sensing_matrix(10, 20, 2);
  for (const TmpConfig& c : variants(1)) {
    const RecoveryResult r = tmp(phi, 2.0 * phi.col(3), c);
    CHECK(r.support == SupportSet{3});
    CHECK(r.x_hat(3) == doctest::Approx(2.0));
  }
}

TEST_CASE("full search equals exhaustive l0 at K = 2") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const MeasurementInstance inst = make_instance(8, 12, 2, kNoiseless, 500 + seed);
    const ExhaustiveResult e = exhaustive_l0_scan(inst.phi, inst.y, 2);
    if (!(e.residual_norm < 1e-8) || !(e.runner_up_residual_norm > e.residual_norm)) continue;
    ++compared;
    for (TmpConfig c : variants(2)) {
      c.preselection = PreselectionMethod::full;
      CHECK(tmp(inst.phi, inst.y, c).support == e.support);
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("trace invariants") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const MeasurementInstance inst = make_instance(40, 80, 6, seed % 2 ? 20.0 : kNoiseless, seed);
    for (const TmpConfig& c : variants(6)) {
      TmpTrace trace;
      const RecoveryResult r = tmp(inst.phi, inst.y, c, &trace);
      REQUIRE(r.stats);
      const TreeStats& st = *r.stats;
      // Thresholds never increase.
      for (std::size_t i = 1; i < st.epsilon_per_layer.size(); ++i)
        CHECK(st.epsilon_per_layer[i] <= st.epsilon_per_layer[i - 1]);
      for (const auto& layer : trace.layers) {
        CHECK(layer.epsilon_out <= layer.epsilon_in);
        std::set<SupportSet> keys;
        for (std::size_t i = 0; i < layer.survivors.size(); ++i) {
          const SearchPath& p = layer.survivors[i];
          CHECK(keys.insert(p.key).second);  // duplicate-free
          CHECK(p.causal.size() == static_cast<std::size_t>(layer.layer));
          CHECK(trace.preselection.theta.includes(p.key));
          CHECK(layer.survivor_residuals[i] <= layer.epsilon_in);
          CHECK(layer.survivor_candidates[i].includes(p.key));
        }
      }
      // The incumbent is the best candidate ever scored.
      const double best = *std::min_element(trace.evaluated_residuals.begin(), trace.evaluated_residuals.end());
      CHECK(r.residual_norm == doctest::Approx(best).epsilon(1e-10));
      CHECK(st.paths_evaluated == trace.evaluated_residuals.size());
      CHECK(st.min_candidate_residual == best);
      CHECK(r.support.size() == 6u);
      if (inst.noiseless() && r.support == inst.x.support) CHECK(r.residual_norm <= 1e-8 * inst.y.norm());
    }
  }
}

TEST_CASE("survivor cap") {
  const MeasurementInstance inst = make_instance(40, 80, 8, 15.0, 3);
  for (TmpConfig c : variants(8)) {
    TmpTrace free_trace;
    const RecoveryResult unlimited = tmp(inst.phi, inst.y, c, &free_trace);
    std::size_t widest = 0;
    for (const auto n : unlimited.stats->survivors_per_layer) widest = std::max(widest, n);

    c.n_max = static_cast<int>(widest);
    const RecoveryResult same = tmp(inst.phi, inst.y, c);
    CHECK(same.support == unlimited.support);
    CHECK(same.x_hat == unlimited.x_hat);

    c.n_max = 3;
    TmpTrace capped;
    const RecoveryResult r = tmp(inst.phi, inst.y, c, &capped);
    for (const auto& layer : capped.layers) {
      CHECK(layer.survivors.size() <= 3u);
      // Kept survivors are the best of the layer.
      const double worst_kept = *std::max_element(layer.survivor_residuals.begin(), layer.survivor_residuals.end());
      CHECK(worst_kept <= layer.epsilon_in);
    }
    CHECK(r.support.size() == 8u);
  }
}

TEST_CASE("finite initial threshold") {
  const MeasurementInstance inst = make_instance(30, 60, 4, 10.0, 12);
  TmpConfig c = config_for(4);
  c.epsilon_init = 0.0;  // rejects everything: best candidate seen is returned
  const RecoveryResult r = tmp(inst.phi, inst.y, c);
  CHECK(r.support.size() == 4u);
  CHECK(r.stats->layers_completed == 0u);
  CHECK(r.residual_norm == doctest::Approx(r.stats->min_candidate_residual).epsilon(1e-10));
}

TEST_CASE("errors") {
  const MeasurementInstance inst = make_instance(10, 20, 3, kNoiseless, 1);
  PreselectionResult tiny;
  tiny.theta = SupportSet{1, 2};
  tiny.order = {1, 2};
  try {
    tree_search(inst.phi, inst.y, tiny, config_for(3));
    FAIL("expected EmptyPreselection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPreselection);
  }
  CHECK_THROWS_AS(tmp(inst.phi, inst.y, config_for(11)), Error);
  CHECK_THROWS_AS(tmp(inst.phi, DenseVector::Ones(9), config_for(2)), Error);
}

TEST_CASE("oracle equivalence and noiseless exactness at small K") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const MeasurementInstance inst = make_instance(100, 256, 8, kNoiseless, seed);
    const RecoveryResult r = tmp(inst.phi, inst.y, config_for(8));
    if (r.support != inst.x.support) continue;
    ++exact;
    const RecoveryResult o = oracle_estimator(inst.phi, inst.y, inst.x.support);
    CHECK((r.x_hat - o.x_hat).cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK(exact == 30);
}

}  // TEST_SUITE
