#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rtdc/errors.hpp"
#include "rtdc/metrics.hpp"
#include "rtdc/rank_one.hpp"

using namespace rtdc;

namespace {

RankOneProblem random_rank_one(oracle::Rng& rng, std::size_t n) {
  RankOneProblem p;
  p.beta = rng.coin() ? rng.uniform(0.2, 2.0) : -rng.uniform(0.2, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    p.d.push_back(rng.uniform(-3.0, 3.0));
    p.v.push_back(rng.uniform(-1.0, 1.0));
  }
  return p;
}

// Resolved eigenvalues plus the oracle spectrum of the reduced problem.
std::vector<double> joint_spectrum(const RankOneDeflation& r) {
  std::vector<double> out = oracle::eigenvalues(oracle::dense_of(r.reduced));
  for (const auto& pair : r.resolved) out.push_back(pair.eigenvalue);
  return out;
}

double column_sign_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      plus = std::max(plus, std::abs(a(i, j) - b(i, j)));
      minus = std::max(minus, std::abs(a(i, j) + b(i, j)));
    }
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

}  // namespace

TEST_SUITE("rank_one") {
  TEST_CASE("zero vector resolves everything") {
    const RankOneProblem p{{3, 1, 2}, {0, 0, 0}, 1.0};
    const RankOneDeflation r = cdc_deflate(p, 1e-12);
    CHECK(r.reduced.size() == 0);
    REQUIRE(r.resolved.size() == 3);
    for (const auto& pair : r.resolved) {
      CHECK(oracle::pair_residual(oracle::dense_of(p), pair.eigenvalue, pair.vector) == 0.0);
      double norm = 0.0;
      for (double x : pair.vector) norm += x * x;
      CHECK(norm == doctest::Approx(1.0));
    }
  }

  TEST_CASE("equal diagonal entries are rotated together") {
    const RankOneProblem p{{1, 1}, {3, 4}, 1.0};
    const RankOneDeflation r = cdc_deflate(p, rank_one_tolerance(p));
    REQUIRE(r.resolved.size() == 1);
    CHECK(r.resolved[0].eigenvalue == 1.0);
    CHECK(std::abs(r.resolved[0].vector[0]) == doctest::Approx(0.8));
    CHECK(std::abs(r.resolved[0].vector[1]) == doctest::Approx(0.6));
    CHECK(oracle::pair_residual(oracle::dense_of(p), 1.0, r.resolved[0].vector) <= 1e-14);
    REQUIRE(r.reduced.size() == 1);
    CHECK(std::abs(r.reduced.v[0]) == doctest::Approx(5.0));
    CHECK(r.givens.size() == 1);
  }

  TEST_CASE("deflation preserves the spectrum") {
    oracle::Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      RankOneProblem p = random_rank_one(rng, 12);
      p.d[3] = p.d[7];
      p.v[5] = 0.0;
      const RankOneDeflation r = cdc_deflate(p, rank_one_tolerance(p));
      CHECK(r.resolved.size() >= 2);
      for (std::size_t i = 1; i < r.reduced.size(); ++i) CHECK(r.reduced.d[i - 1] < r.reduced.d[i]);
      const Matrix a = oracle::dense_of(p);
      CHECK(oracle::max_sorted_gap(joint_spectrum(r), oracle::eigenvalues(a)) <= 1e-12);
      for (const auto& pair : r.resolved) CHECK(oracle::pair_residual(a, pair.eigenvalue, pair.vector) <= 1e-12);
    }
  }

  TEST_CASE("secular roots: closed forms") {
    const auto one = cdc_secular_roots(RankOneProblem{{0}, {1}, 2.0});
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(2.0).epsilon(1e-15));

    const double r = 1.0 / std::sqrt(2.0);
    const RankOneProblem p{{0, 1}, {r, r}, 1.0};
    const auto two = cdc_secular_roots(p);
    REQUIRE(two.size() == 2);
    CHECK(std::abs(two[0] - (1.0 - r)) <= 4 * oracle::kEps);
    CHECK(std::abs(two[1] - (1.0 + r)) <= 4 * oracle::kEps);
  }

  TEST_CASE("secular roots interlace and match the oracle") {
    oracle::Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
      const RankOneProblem raw = random_rank_one(rng, 10);
      const RankOneProblem p = cdc_deflate(raw, rank_one_tolerance(raw)).reduced;
      const RankOneRoots roots = rank_one_roots(p);
      REQUIRE(roots.size() == p.size());
      for (std::size_t j = 0; j < roots.size(); ++j) {
        const double lo = p.beta > 0 ? p.d[j] : (j == 0 ? -INFINITY : p.d[j - 1]);
        const double hi = p.beta > 0 ? (j + 1 < p.size() ? p.d[j + 1] : INFINITY) : p.d[j];
        CHECK(roots.lambda[j] > lo);
        CHECK(roots.lambda[j] < hi);
      }
      const auto ref = oracle::eigenvalues(oracle::dense_of(p));
      const double scale = std::max(std::abs(ref.front()), std::abs(ref.back()));
      CHECK(oracle::max_sorted_gap(roots.lambda, ref) <= 1e-12 * scale);
    }
  }

  TEST_CASE("stable vectors: small cases") {
    const Matrix one = cdc_stable_vectors(RankOneProblem{{0}, {1}, 2.0}, std::vector<double>{2.0});
    CHECK(std::abs(one(0, 0)) == doctest::Approx(1.0));

    const double r = 1.0 / std::sqrt(2.0);
    const RankOneProblem p{{0, 1}, {r, r}, 1.0};
    const Matrix v = cdc_stable_vectors(p, rank_one_roots(p));
    CHECK(column_sign_gap(v, oracle::jacobi(oracle::dense_of(p)).vectors) <= 1e-10);
  }

  TEST_CASE("stable vectors stay orthogonal on clustered poles") {
    oracle::Rng rng(14);
    RankOneProblem p;
    p.beta = 1.0;
    double x = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      x += (i % 4 == 0) ? rng.uniform(0.1, 0.5) : 1e-12 * rng.uniform(1.0, 2.0);
      p.d.push_back(x);
      p.v.push_back(rng.uniform(0.2, 1.0));
    }
    const RankOneProblem q = cdc_deflate(p, rank_one_tolerance(p)).reduced;
    REQUIRE(q.size() >= 10);
    const RankOneRoots roots = rank_one_roots(q);
    const SpectralDecomposition dec{roots.lambda, cdc_stable_vectors(q, roots)};
    CHECK(orthogonality_measure(dec) <= 5.0);
    CHECK(residual_measure(DenseSym(oracle::dense_of(q)), dec) <= 5.0);

    const SpectralDecomposition full = rank_one_eigensystem(p);
    CHECK(orthogonality_measure(full) <= 5.0);
    CHECK(residual_measure(DenseSym(oracle::dense_of(p)), full) <= 5.0);
  }

  TEST_CASE("interlacing violation is an internal error") {
    const RankOneProblem p{{0, 1}, {1, 1}, 1.0};
    CHECK_THROWS_AS(cdc_stable_vectors(p, std::vector<double>{0.5, 0.7}), InternalConsistencyError);
  }

  TEST_CASE("cdc_solve") {
    const SymTridiag small = random_tridiag(20, 3);
    const auto base = cdc_solve(small, 25), qr = qr_eigensolve(small);
    CHECK(base.eigenvalues == qr.eigenvalues);
    CHECK(base.vectors == qr.vectors);

    const SymTridiag lap = householder_tridiagonalize(laplacian_2d(3)).t;
    const auto exact = laplacian_2d_eigenvalues(3);
    const auto dec = cdc_solve(lap, 2);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(dec.eigenvalues[i] - exact[i]) <= 1e-12 * exact[i]);

    const SymTridiag t = random_tridiag(100, 4);
    const auto big = cdc_solve(t, 8);
    const auto ref = oracle::eigenvalues(t.to_dense());
    const double norm = std::max(std::abs(ref.front()), std::abs(ref.back()));
    CHECK(oracle::max_sorted_gap(big.eigenvalues, ref) <= 100 * oracle::kEps * norm);
    CHECK(residual_measure(t, big) <= 5.0);
    CHECK(orthogonality_measure(big) <= 5.0);
  }
}
