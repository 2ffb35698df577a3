#include <cmath>
#include <random>
#include <vector>

#include "ccadet/racma.hpp"
#include "ccadet/types.hpp"
#include "doctest.h"

namespace {

using namespace ccadet;

RealMatrix random_signs(int t, int k, Rng& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  RealMatrix s(t, k);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = coin(rng) ? 1.0 : -1.0;
  }
  return s;
}

/// Random ±1 block guaranteed to have full column rank (distinct, non-opposite
/// columns re-drawn when degenerate).
RealMatrix full_rank_signs(int t, int k, Rng& rng) {
  for (;;) {
    const RealMatrix s = random_signs(t, k, rng);
    Eigen::JacobiSVD<RealMatrix> svd(s);
    if (svd.singularValues()[k - 1] > 1e-6 * svd.singularValues()[0]) return s;
  }
}

RealMatrix random_orthogonal(int k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RealMatrix a(k, k);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<RealMatrix> qr(a);
  return RealMatrix(qr.householderQ());
}

RealMatrix random_noise(int t, int k, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  RealMatrix n(t, k);
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    for (Eigen::Index j = 0; j < n.cols(); ++j) n(i, j) = normal(rng);
  }
  return n;
}

bool all_pm1(const RealMatrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (std::abs(s(i, j)) != 1.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("racma") {

TEST_CASE("racma_min_rows applies the identifiability floor") {
  CHECK(racma_min_rows(1) == 8);
  CHECK(racma_min_rows(2) == 8);
  CHECK(racma_min_rows(3) == 18);
  CHECK(racma_min_rows(4) == 32);

  Rng rng(3);
  const RealMatrix s = full_rank_signs(6, 2, rng);  // below the floor of 8
  CHECK_THROWS_AS(racma_factorize(MixtureBlock{s, 2}), DimensionError);
}

TEST_CASE("an unmixed block is returned as-is") {
  Rng rng(5);
  const RealMatrix s = full_rank_signs(200, 2, rng);
  const UnmixResult r = racma_factorize(MixtureBlock{s, 2});
  CHECK(all_pm1(r.s_hat));
  CHECK(r.residual < 1e-8);
  const Alignment a = resolve_ambiguity(r.s_hat, s);
  CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noiseless mixtures are recovered exactly up to signed permutation") {
  Rng rng(7);
  for (int k_e : {1, 2, 3}) {
    for (int t : {64, 256}) {
      // Orthogonal and general well-conditioned mixings.
      for (int style = 0; style < 2; ++style) {
        const RealMatrix s = full_rank_signs(t, k_e, rng);
        RealMatrix p = random_orthogonal(k_e, rng);
        if (style == 1) {
          p += 0.3 * random_noise(k_e, k_e, 1.0, rng);
        }
        const UnmixResult r = racma_factorize(MixtureBlock{s * p, k_e});
        CHECK(all_pm1(r.s_hat));
        CHECK(r.residual < 1e-7);
        const Alignment a = resolve_ambiguity(r.s_hat, s);
        CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);
        // The recovered factorization reproduces the mixture.
        CHECK((r.s_hat * r.mixing_hat - s * p).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
}

TEST_CASE("estimates always have exact unit-modulus entries") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const RealMatrix s = full_rank_signs(64, 2, rng);
    const RealMatrix p = random_orthogonal(2, rng);
    const RealMatrix g = s * p + random_noise(64, 2, 0.3, rng);
    const UnmixResult r = racma_factorize(MixtureBlock{g, 2});
    CHECK(all_pm1(r.s_hat));
    CHECK(r.residual == doctest::Approx((g - r.s_hat * r.mixing_hat).norm()).epsilon(1e-12));
  }
}

TEST_CASE("identical inputs give identical outputs") {
  Rng rng(13);
  const RealMatrix s = full_rank_signs(80, 2, rng);
  const RealMatrix g = s * random_orthogonal(2, rng) + random_noise(80, 2, 0.2, rng);
  const UnmixResult a = racma_factorize(MixtureBlock{g, 2});
  const UnmixResult b = racma_factorize(MixtureBlock{g, 2});
  CHECK(a.s_hat == b.s_hat);
  CHECK(a.mixing_hat == b.mixing_hat);
  CHECK(a.residual == b.residual);
}

TEST_CASE("rank-deficient mixtures are rejected as non-identifiable") {
  Rng rng(17);
  const RealMatrix s = full_rank_signs(64, 1, rng);
  RealMatrix g(64, 2);
  g.col(0) = s.col(0);
  g.col(1) = 2.0 * s.col(0);  // both columns carry the same source
  CHECK_THROWS_AS(racma_factorize(MixtureBlock{g, 2}), NumericalError);

  CHECK_THROWS_AS(racma_factorize(MixtureBlock{RealMatrix::Zero(64, 3), 2}), DimensionError);
}

TEST_CASE("stacking a second consistent block never hurts the noiseless fit") {
  Rng rng(19);
  for (int rep = 0; rep < 5; ++rep) {
    const RealMatrix p = random_orthogonal(2, rng);
    const RealMatrix s1 = full_rank_signs(64, 2, rng);
    const RealMatrix s2 = full_rank_signs(64, 2, rng);
    RealMatrix stacked_s(128, 2);
    stacked_s.topRows(64) = s1;
    stacked_s.bottomRows(64) = s2;

    const UnmixResult single = racma_factorize(MixtureBlock{s1 * p, 2});
    const UnmixResult both = racma_factorize(MixtureBlock{stacked_s * p, 2});
    CHECK(both.residual <= single.residual + 1e-9);
    CHECK(both.residual < 1e-7);
  }
}

TEST_CASE("reduce_to_mixture recovers the dominant subspace of a stack") {
  Rng rng(23);
  const int t = 120;
  const RealMatrix s = full_rank_signs(t, 2, rng);
  const RealMatrix mix = random_noise(10, 2, 1.0, rng);  // antenna-domain map
  const RealMatrix stacked = mix * s.transpose();        // 10 x t, rank 2

  const MixtureBlock block = reduce_to_mixture(stacked, 2);
  CHECK(block.k_e == 2);
  CHECK(block.g.rows() == t);
  CHECK(block.g.cols() == 2);

  // The reduced mixture spans the sources: RACMA separates it exactly.
  const UnmixResult r = racma_factorize(block);
  const Alignment a = resolve_ambiguity(r.s_hat, s);
  CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(reduce_to_mixture(stacked, 11), DimensionError);
}

TEST_CASE("resolve_ambiguity undoes signed column permutations") {
  Rng rng(29);
  const RealMatrix s = full_rank_signs(100, 3, rng);

  SUBCASE("identity") {
    const Alignment a = resolve_ambiguity(s, s);
    CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.permutation == std::vector<int>{0, 1, 2});
    CHECK(a.signs == RealVector::Ones(3));
  }

  SUBCASE("swap and negate") {
    RealMatrix shuffled(100, 3);
    shuffled.col(0) = -s.col(1);
    shuffled.col(1) = s.col(2);
    shuffled.col(2) = s.col(0);
    const Alignment a = resolve_ambiguity(shuffled, s);
    CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);
    // aligned column j = estimate column permutation[j], sign-corrected.
    CHECK(a.permutation == std::vector<int>{2, 0, 1});
    CHECK(a.signs[1] == -1.0);
  }

  SUBCASE("sparse bit flips survive the matching") {
    RealMatrix noisy = s;
    std::uniform_int_distribution<int> row(0, 99);
    int flips = 0;
    for (int j = 0; j < 3; ++j) {
      for (int f = 0; f < 10; ++f) {  // 10% flips per column
        noisy(row(rng), j) *= -1.0;
      }
    }
    const Alignment a = resolve_ambiguity(noisy, s);
    CHECK(a.permutation == std::vector<int>{0, 1, 2});
    for (int j = 0; j < 3; ++j) CHECK(a.signs[j] == 1.0);
    flips = static_cast<int>(((a.aligned - s).cwiseAbs().array() > 0.0).count());
    CHECK(flips <= 30);  // repeated row draws can overlap
    CHECK(flips > 0);
  }

  CHECK_THROWS_AS(resolve_ambiguity(s, full_rank_signs(99, 3, rng)), DimensionError);
}

TEST_CASE("the exhaustive oracle is exact on tiny noiseless mixtures") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const RealMatrix s = full_rank_signs(8, 2, rng);
    const RealMatrix p = random_orthogonal(2, rng);
    const UnmixResult r = cm_oracle_factorize(s * p, 2);
    CHECK(r.residual < 1e-9);
    const Alignment a = resolve_ambiguity(r.s_hat, s);
    CHECK((a.aligned - s).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("the oracle refuses problems beyond the enumeration limits") {
  Rng rng(37);
  const RealMatrix wide = full_rank_signs(20, 3, rng);
  CHECK_THROWS_AS(cm_oracle_factorize(full_rank_signs(17, 2, rng), 2), DimensionError);
  CHECK_THROWS_AS(cm_oracle_factorize(wide.leftCols(3), 3), DimensionError);
  CHECK_THROWS_AS(cm_oracle_factorize(full_rank_signs(8, 2, rng), 1), DimensionError);
}

TEST_CASE("racma matches the oracle's optimum on tiny noisy mixtures") {
  Rng rng(41);
  int agree = 0;
  const int instances = 40;
  for (int rep = 0; rep < instances; ++rep) {
    const RealMatrix s = full_rank_signs(12, 2, rng);
    const RealMatrix p = random_orthogonal(2, rng);
    const RealMatrix g = s * p + random_noise(12, 2, 0.15, rng);
    const UnmixResult fast = racma_factorize(MixtureBlock{g, 2});
    const UnmixResult oracle = cm_oracle_factorize(g, 2);
    const Alignment a = resolve_ambiguity(fast.s_hat, oracle.s_hat);
    if ((a.aligned - oracle.s_hat).cwiseAbs().maxCoeff() == 0.0) ++agree;
  }
  CHECK(agree >= (instances * 9) / 10);
}

}  // TEST_SUITE("racma")
