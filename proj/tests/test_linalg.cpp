#include <doctest.h>

#include <Eigen/SVD>

#include "helpers.hpp"
#include "treemp/error.hpp"

using namespace treemp;
using namespace treemp::test;

TEST_SUITE("linalg") {

TEST_CASE("support sets are canonical") {
  const SupportSet a = SupportSet::from_indices({7, 2, 5});
  CHECK(a.indices() == std::vector<Index>{2, 5, 7});
  CHECK(a == SupportSet{5, 7, 2});
  CHECK(a.to_string() == "{2, 5, 7}");
  CHECK(a.contains(5));
  CHECK_FALSE(a.contains(3));
  CHECK(a.includes(SupportSet{2, 7}));
  CHECK_FALSE(a.includes(SupportSet{2, 3}));
  CHECK(a.with(3) == SupportSet{2, 3, 5, 7});
  CHECK(a.minus(SupportSet{5}) == SupportSet{2, 7});
  CHECK(a.unite(SupportSet{1, 2}) == SupportSet{1, 2, 5, 7});
  CHECK(a.intersect(SupportSet{1, 2, 7}) == SupportSet{2, 7});
  CHECK(SupportSet::universe(3) == SupportSet{0, 1, 2});
  CHECK_THROWS_AS(SupportSet::from_indices({1, 1}), Error);
  CHECK_THROWS_AS(SupportSet::from_indices({-1}), Error);
  CHECK_THROWS_AS(a.check_bounds(7), Error);
  CHECK(SupportSetHash{}(SupportSet{1, 2}) == SupportSetHash{}(SupportSet::from_indices({2, 1})));
}

TEST_CASE("least squares: identity and orthogonal cases") {
  const DenseMatrix eye = DenseMatrix::Identity(3, 3);
  DenseVector y(3);
  y << 5, 0, 0;
  const DenseVector c = least_squares_on_support(eye, y, SupportSet{0});
  REQUIRE(c.size() == 1);
  CHECK(c(0) == doctest::Approx(5.0));

  const DenseMatrix q = orthonormal(6, 11);
  const DenseVector perp = q.col(4) * 2.0 - q.col(5);
  CHECK(least_squares_on_support(q, perp, SupportSet{0, 1, 2}).norm() < 1e-12);
}

TEST_CASE("least squares agrees with an SVD solve") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DenseMatrix phi = random_matrix(15, 30, seed);
    const DenseVector y = random_vector(15, seed + 100);
    std::mt19937_64 rng(seed);
    const SupportSet s = random_subset(30, 1 + static_cast<int>(seed % 10), rng);
    const DenseMatrix sub = gather_columns(phi, s);
    const DenseVector expected = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    CHECK((least_squares_on_support(phi, y, s) - expected).norm() < 1e-10 * (1.0 + expected.norm()));
  }
}

TEST_CASE("least squares rejects bad input") {
  DenseMatrix phi = random_matrix(5, 6, 1);
  const DenseVector y = random_vector(5, 2);
  CHECK_THROWS_AS(least_squares_on_support(phi, y, SupportSet{9}), Error);
  CHECK_THROWS_AS(least_squares_on_support(phi, DenseVector::Ones(4), SupportSet{1}), Error);
  phi.col(3) = phi.col(1);
  try {
    least_squares_on_support(phi, y, SupportSet{1, 3});
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("residual: empty support, exact span, orthogonality, idempotence") {
  const DenseMatrix phi = random_matrix(12, 20, 3);
  const DenseVector y = random_vector(12, 4);
  CHECK(residual(phi, y, SupportSet{}) == y);

  DenseVector c(2);
  c << 1.5, -0.25;
  const DenseVector spanned = phi.col(3) * c(0) + phi.col(8) * c(1);
  CHECK(residual(phi, spanned, SupportSet{3, 8}).norm() < 1e-10);

  const SupportSet s{0, 4, 9, 17};
  const DenseVector r = residual(phi, y, s);
  for (Index j : s) CHECK(std::abs(phi.col(j).dot(r)) <= 1e-8 * y.norm());
  CHECK((residual(phi, r, s) - r).norm() < 1e-10);
}

TEST_CASE("correlations: zero residual and aligned column") {
  DenseMatrix phi = random_matrix(6, 8, 5);
  const auto zero = correlations(phi, DenseVector::Zero(6), SupportSet::universe(8));
  REQUIRE(zero.size() == 8);
  for (const auto& c : zero) CHECK(c.value == 0.0);

  const DenseVector r = random_vector(6, 6);
  phi.col(2) = r / r.norm();
  const auto cs = correlations(phi, r, SupportSet{1, 2, 5});
  REQUIRE(cs.size() == 3);
  CHECK(cs[1].index == 2);
  CHECK(cs[1].value == doctest::Approx(r.norm()));
  CHECK(cs[0].value == doctest::Approx(std::abs(phi.col(1).dot(r))));
}

TEST_CASE("top-k by magnitude") {
  const std::vector<Correlation> worked{{5, 0.3}, {7, 0.9}, {9, 0.1}, {11, 0.6}};
  CHECK(top_k_by_magnitude(worked, 2) == SupportSet{7, 11});

  const std::vector<Correlation> ties{{3, 1.0}, {1, 1.0}, {2, 1.0}};
  CHECK(top_k_by_magnitude(ties, 2) == SupportSet{1, 2});

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Correlation> random;
  for (Index j = 0; j < 10; ++j) random.push_back({j, u(rng)});
  CHECK(top_k_by_magnitude(random, 10) == SupportSet::universe(10));
  CHECK(top_k_by_magnitude(random, 4) == top_k_by_magnitude(random, 4));
  CHECK(top_k_by_magnitude(random, 0).empty());
}

TEST_CASE("incremental projector matches from-scratch residuals") {
  const DenseMatrix phi = random_matrix(20, 40, 7);
  const DenseVector y = random_vector(20, 8);
  const DenseMatrix gram = phi.transpose() * phi;
  IncrementalProjector plain(phi, y);
  IncrementalProjector tracked(phi, y, &gram);
  std::vector<Index> order{13, 2, 39, 21, 0, 7, 30, 18};
  std::vector<Index> so_far;
  for (Index j : order) {
    const DenseVector predicted = plain.residual_if_pushed(j);
    plain.push(j);
    tracked.push(j);
    so_far.push_back(j);
    const DenseVector expected = residual(phi, y, SupportSet::from_indices(so_far));
    CHECK((predicted - expected).norm() < 1e-10);
    CHECK((plain.residual() - expected).norm() < 1e-10);
    CHECK((tracked.residual() - expected).norm() < 1e-10);
    CHECK((tracked.correlations() - phi.transpose() * expected).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(plain.columns() == order);
  CHECK(tracked.tracks_correlations());
  CHECK_FALSE(plain.tracks_correlations());
}

TEST_CASE("incremental projector checkpoint and rollback") {
  const DenseMatrix phi = random_matrix(10, 16, 12);
  const DenseVector y = random_vector(10, 13);
  const DenseMatrix gram = phi.transpose() * phi;
  IncrementalProjector proj(phi, y, &gram);
  proj.push(3);
  const auto cp = proj.checkpoint();
  const DenseVector at_cp = proj.residual();
  proj.push(5);
  proj.push(11);
  proj.rollback(cp);
  CHECK(proj.size() == 1);
  CHECK(proj.residual() == at_cp);
  proj.push(8);
  CHECK((proj.residual() - residual(phi, y, SupportSet{3, 8})).norm() < 1e-10);
  CHECK((proj.correlations() - phi.transpose() * proj.residual()).cwiseAbs().maxCoeff() < 1e-10);

  IncrementalProjector other(phi, y);
  CHECK_THROWS_AS(other.rollback(cp), Error);
}

TEST_CASE("incremental projector rejects dependent and invalid columns") {
  DenseMatrix phi = random_matrix(4, 6, 14);
  phi.col(5) = 2.0 * phi.col(1) - phi.col(2);
  const DenseVector y = random_vector(4, 15);
  IncrementalProjector proj(phi, y);
  proj.push(1);
  proj.push(2);
  CHECK_THROWS_AS(proj.push(5), Error);
  CHECK_THROWS_AS(proj.push(6), Error);
  proj.push(0);
  proj.push(3);
  CHECK(proj.residual().norm() < 1e-10);
  CHECK_THROWS_AS(proj.push(4), Error);  // basis already spans R^M
}

TEST_CASE("residual monotonicity over nested supports") {
  std::mt19937_64 rng(21);
  const DenseMatrix phi = random_matrix(16, 32, 22);
  for (int t = 0; t < 100; ++t) {
    const DenseVector y = random_vector(16, 1000 + static_cast<std::uint64_t>(t));
    const SupportSet big = random_subset(32, 8, rng);
    std::vector<Index> part(big.begin(), big.begin() + 1 + t % 7);
    const SupportSet small = SupportSet::from_indices(part);
    CHECK(residual(phi, y, big).norm() <= residual(phi, y, small).norm() + 1e-10);
  }
}

}  // TEST_SUITE
