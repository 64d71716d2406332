#include "test_util.hpp"

using namespace etrs;
using namespace etrs::testing;

namespace {

LNGMResult lngm_of(const SymOp& A, const Vector& a, double delta, const SolverConfig& cfg = {}) {
  return find_lngm(A, a, delta, extreme_eigs(A, cfg), cfg);
}

}  // namespace

TEST(FindLNGM, TwoByTwoExample) {
  const LNGMResult r = lngm_of(diag({-2.0, 0.0}), vec({1.0, 0.0}), 1.0);
  ASSERT_TRUE(r.found());
  EXPECT_NEAR(r.lambda, 1.0, 1e-12);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
  EXPECT_NEAR(r.obj, 0.0, 1e-12);
}

TEST(FindLNGM, ConvexHasNone) {
  EXPECT_EQ(lngm_of(SymOp::identity(3), vec({1.0, -2.0, 0.5}), 1.0).status, LNGMStatus::none_convex);
}

TEST(FindLNGM, RepeatedSmallestEigenvalueHasNone) {
  const LNGMResult r = lngm_of(diag({-2.0, -2.0, 0.0}), vec({0.0, 1.0, 1.0}), 1.0);
  EXPECT_TRUE(r.status == LNGMStatus::none_multiplicity || r.status == LNGMStatus::none_hard_case);
}

TEST(FindLNGM, HardCaseHasNone) {
  EXPECT_EQ(lngm_of(diag({-2.0, 0.0}), vec({0.0, 1.0}), 1.0).status, LNGMStatus::none_hard_case);
}

TEST(FindLNGM, ScalarProblem) {
  const LNGMResult r = lngm_of(diag({-1.0}), vec({0.5}), 1.0);
  ASSERT_TRUE(r.found());
  EXPECT_NEAR(r.lambda, 0.5, 1e-12);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.obj, 0.0, 1e-12);
}

TEST(FindLNGM, NoRootInIntervalReported) {
  // φ(λ) = 1/(λ − 2)² ≥ 1/4 on (0, 2), so φ = 0.1 has no root there.
  const LNGMResult r = lngm_of(diag({-2.0, 0.0}), vec({1.0, 0.0}), 0.1);
  EXPECT_NE(r.status, LNGMStatus::found);
}

TEST(PhiPrime, SignsOnBothBranches) {
  const SymOp A = diag({-2.0, 0.0});
  const Vector a = vec({1.0, 0.0});
  EXPECT_NEAR(phi_derivative_check(A, a, 1.0, vec({1.0, 0.0})).value, 2.0, 1e-12);
  EXPECT_NEAR(phi_derivative_check(A, a, 3.0, vec({-1.0, 0.0})).value, -2.0, 1e-12);
  EXPECT_EQ(phi_derivative_check(A, vec({0.0, 0.0}), 1.0, vec({0.0, 0.0})).value, 0.0);
}

TEST(PhiPrime, IterativePathAgreesWithDense) {
  SolverConfig cfg;
  cfg.dense_crossover = 1;
  const SymOp A = diag({-2.0, 0.0, 3.0});
  const Vector a = vec({1.0, 0.5, -1.0});
  const double lam = 1.0;
  const Vector x = -(A.to_dense() + lam * Matrix::Identity(3, 3)).lu().solve(a);
  EXPECT_NEAR(phi_derivative_check(A, a, lam, x, cfg).value, phi_derivative_check(A, a, lam, x).value, 1e-10);
}

TEST(FindLNGM, MatchesOracleOnGeneratedInstances) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 49);
    const PlantedTRS L = gen_lngm_trs(n, 1.0, seed, 1.0 + static_cast<double>(seed % 3), MuRule::uniform);
    const SymOp A = SymOp::sparse(L.A);
    const LNGMResult r = lngm_of(A, L.a, L.delta);
    const OracleLNGM o = oracle_lngm(dense_eig(Matrix(L.A), L.a), L.a, L.delta);
    ASSERT_TRUE(o.result.found()) << "seed " << seed;
    ASSERT_TRUE(r.found()) << "seed " << seed << ": " << to_string(r.status) << " " << r.detail;
    EXPECT_NEAR(r.lambda, o.result.lambda, 1e-8 * std::max(1.0, std::abs(o.result.lambda))) << "seed " << seed;
    EXPECT_NEAR(r.lambda, L.lambda_lngm, 1e-8 * std::max(1.0, L.lambda_lngm)) << "seed " << seed;
    EXPECT_LE(std::abs(r.x.squaredNorm() - L.delta), 1e-8 * L.delta);
    EXPECT_LE(o.roots.size(), 2u);
    EXPECT_GE(o.reduced_hessian_min, -1e-8);
  }
}
