#include "test_util.hpp"

using namespace etrs;
using namespace etrs::testing;

TEST(SolveTRS, InteriorConvex) {
  const TRSSolution s = solve_trs(SymOp::identity(2), vec({1.0, 0.0}), 4.0);
  EXPECT_EQ(s.kind, TRSCase::interior);
  EXPECT_NEAR(s.x[0], -1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 0.0, 1e-12);
  EXPECT_EQ(s.lambda, 0.0);
  EXPECT_NEAR(s.obj, -1.0, 1e-12);
}

TEST(SolveTRS, ScalarBoundary) {
  const TRSSolution s = solve_trs(diag({-1.0}), vec({0.5}), 1.0);
  EXPECT_EQ(s.kind, TRSCase::boundary_easy);
  EXPECT_NEAR(s.x[0], -1.0, 1e-12);
  EXPECT_NEAR(s.lambda, 1.5, 1e-12);
  EXPECT_NEAR(s.obj, -2.0, 1e-12);
}

TEST(SolveTRS, IndefiniteEasyCase) {
  const TRSSolution s = solve_trs(diag({-2.0, 0.0}), vec({1.0, 0.0}), 1.0);
  EXPECT_NEAR(s.x[0], -1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 0.0, 1e-12);
  EXPECT_NEAR(s.lambda, 3.0, 1e-12);
  EXPECT_NEAR(s.obj, -4.0, 1e-12);
  EXPECT_LE(s.kkt1, 1e-12);
}

TEST(SolveTRS, HardCase) {
  const TRSSolution s = solve_trs(diag({-2.0, 0.0}), vec({0.0, 1.0}), 4.0);
  EXPECT_EQ(s.kind, TRSCase::boundary_hard);
  EXPECT_NEAR(s.lambda, 2.0, 1e-12);
  EXPECT_NEAR(s.x[1], -0.5, 1e-12);
  EXPECT_NEAR(std::abs(s.x[0]), std::sqrt(3.75), 1e-12);
  EXPECT_NEAR(s.x.squaredNorm(), 4.0, 1e-12);
  EXPECT_NEAR(s.obj, -8.5, 1e-12);
}

TEST(SolveTRS, HardCaseTieBreakPicksSmallerInnerProduct) {
  const Vector t = vec({1.0, 0.0});
  TRSOptions opt;
  opt.tie_break = &t;
  const TRSSolution s = solve_trs(diag({-2.0, 0.0}), vec({0.0, 1.0}), 4.0, {}, opt);
  EXPECT_NEAR(s.x[0], -std::sqrt(3.75), 1e-12);
}

TEST(SolveTRS, ZeroLinearTerm) {
  const TRSSolution s = solve_trs(diag({-2.0, 1.0}), vec({0.0, 0.0}), 4.0);
  EXPECT_NEAR(std::abs(s.x[0]), 2.0, 1e-12);
  EXPECT_NEAR(s.lambda, 2.0, 1e-12);
  const TRSSolution c = solve_trs(diag({2.0, 1.0}), vec({0.0, 0.0}), 4.0);
  EXPECT_EQ(c.kind, TRSCase::interior);
  EXPECT_EQ(c.x.norm(), 0.0);
}

TEST(RecoverHardCase, HandQuadratic) {
  Matrix V(2, 1);
  V << 1.0, 0.0;
  const Vector x = recover_hard_case(diag({-2.0, 0.0}), SymOp::identity(2), 2.0, vec({0.0, 1.0}), 4.0, V, {});
  EXPECT_NEAR(x[1], -0.5, 1e-13);
  EXPECT_NEAR(std::abs(x[0]), std::sqrt(3.75), 1e-13);
}

TEST(RecoverHardCase, ZeroLinearTermGivesEigenvector) {
  Matrix V(2, 1);
  V << 1.0, 0.0;
  const Vector x = recover_hard_case(diag({-2.0, 0.0}), SymOp::identity(2), 2.0, vec({0.0, 0.0}), 9.0, V, {});
  EXPECT_NEAR(std::abs(x[0]), 3.0, 1e-13);
  EXPECT_NEAR(x[1], 0.0, 1e-13);
}

TEST(RecoverHardCase, RadiusBelowMinimumNormFails) {
  Matrix V(2, 1);
  V << 1.0, 0.0;
  EXPECT_THROW(recover_hard_case(diag({-2.0, 0.0}), SymOp::identity(2), 2.0, vec({0.0, 1.0}), 0.1, V, {}), Error);
}

TEST(SolveTRS, MatchesOracleOnRandomInstances) {
  int count = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (MixedCategory cat : {MixedCategory::convex_interior, MixedCategory::convex_boundary,
                              MixedCategory::indefinite_easy, MixedCategory::hard_case}) {
      const Index n = 2 + static_cast<Index>(seed % 49);
      const ETRSInstance inst = generate_mixed(cat, n, seed);
      const TRSSolution s = solve_trs(inst.A, inst.a, inst.delta);
      const TRSSolution o = oracle_trs(dense_eig(inst.A.to_dense(), inst.a), inst.a, inst.delta);
      EXPECT_LE(rel(s.obj, o.obj), 1e-8) << to_string(cat) << " seed " << seed;
      const ExtremeEigs e = extreme_eigs(inst.A);
      EXPECT_GE(s.lambda + e.lambda1, -1e-8);
      const double scale = inst.A.to_dense().cwiseAbs().colwise().sum().maxCoeff() + inst.a.lpNorm<Eigen::Infinity>();
      EXPECT_LE(s.kkt1, 1e-7 * scale);
      ++count;
    }
  }
  EXPECT_EQ(count, 200);
}

TEST(SolveTRS, GeneralMetricMatchesDenseTransform) {
  // xᵀBx ≤ δ with B = LLᵀ maps to the identity metric through z = Lᵀx.
  SplitMix64 rng(9);
  const Index n = 8;
  const SymOp B = SymOp::diag_rank_one(rng.uniform_vector(n) + 0.5 * Vector::Ones(n), rng.normal_vector(n), 0.3);
  const Matrix Bd = B.to_dense();
  const Matrix A = random_symmetric(n, rng);
  const Vector a = rng.normal_vector(n);
  const TRSSolution s = solve_trs(SymOp::from_dense(A), a, 2.0, B);
  const Eigen::LLT<Matrix> llt(Bd);
  const Matrix Linv = llt.matrixL().solve(Matrix::Identity(n, n));
  const Matrix At = Linv * A * Linv.transpose();
  const Vector at = Linv * a;
  const TRSSolution o = oracle_trs(dense_eig(At, at), at, 2.0);
  EXPECT_LE(rel(s.obj, o.obj), 1e-9);
  EXPECT_NEAR(s.x.dot(Bd * s.x), 2.0, 1e-9);
}

TEST(SolveTRS, LargeSparseMatchesDensePath) {
  SplitMix64 rng(12);
  const Index n = 350;
  const SymOp A = SymOp::sparse(random_sparse_symmetric(n, 0.02, rng));
  const Vector a = rng.normal_vector(n);
  const TRSSolution s = solve_trs(A, a, 3.0);
  SolverConfig dense;
  dense.dense_crossover = 400;
  const TRSSolution d = solve_trs(A, a, 3.0, dense);
  EXPECT_LE(rel(s.obj, d.obj), 1e-10);
  EXPECT_LE(s.kkt1, 1e-8);
}
