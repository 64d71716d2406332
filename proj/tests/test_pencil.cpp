#include "test_util.hpp"

using namespace etrs;
using namespace etrs::testing;

TEST(Pencil, ScalarBlocks) {
  const TRSPencil P = build_pencil(diag({-1.0}), vec({0.5}), 1.0);
  Matrix M0(2, 2), M1(2, 2);
  M0 << -1, -1, -1, -0.25;
  M1 << 0, 1, 1, 0;
  EXPECT_LE((P.dense_M0() - M0).norm(), 1e-15);
  EXPECT_LE((P.dense_M1() - M1).norm(), 1e-15);
}

TEST(Pencil, TwoByTwoBlocks) {
  const TRSPencil P = build_pencil(diag({-2.0, 0.0}), vec({1.0, 0.0}), 1.0);
  Matrix M0 = Matrix::Zero(4, 4);
  M0.topLeftCorner(2, 2) = -Matrix::Identity(2, 2);
  M0(0, 2) = M0(2, 0) = -2.0;
  M0(2, 2) = -1.0;
  Matrix M1 = Matrix::Zero(4, 4);
  M1.topRightCorner(2, 2).setIdentity();
  M1.bottomLeftCorner(2, 2).setIdentity();
  EXPECT_LE((P.dense_M0() - M0).norm(), 1e-15);
  EXPECT_LE((P.dense_M1() - M1).norm(), 1e-15);
}

TEST(Pencil, ZeroLinearTermRejected) {
  EXPECT_THROW(build_pencil(diag({-2.0, 0.0}), vec({0.0, 0.0}), 1.0), std::invalid_argument);
  EXPECT_THROW(build_pencil(diag({-2.0, 0.0}), vec({1.0, 0.0}), 0.0), std::invalid_argument);
}

TEST(Pencil, ScalarRealEigenvalues) {
  const PencilEigs e = top_real_eigs(build_pencil(diag({-1.0}), vec({0.5}), 1.0), 2);
  ASSERT_EQ(e.pairs.size(), 2u);
  EXPECT_NEAR(e.pairs[0].lambda, 1.5, 1e-12);
  EXPECT_NEAR(e.pairs[1].lambda, 0.5, 1e-12);
}

TEST(Pencil, TwoByTwoTopEigenvalues) {
  const TRSPencil P = build_pencil(diag({-2.0, 0.0}), vec({1.0, 0.0}), 1.0);
  const PencilEigs e = top_real_eigs(P, 2);
  ASSERT_EQ(e.pairs.size(), 2u);
  EXPECT_NEAR(e.pairs[0].lambda, 3.0, 1e-12);
  EXPECT_NEAR(e.pairs[1].lambda, 1.0, 1e-12);
  for (const auto& p : e.pairs) EXPECT_LE(p.residual, 1e-8);
}

TEST(Pencil, ConvexInteriorHasNonpositiveTopEigenvalue) {
  const PencilEigs e = top_real_eigs(build_pencil(diag({1.0, 2.0}), vec({0.1, 0.0}), 100.0), 1);
  ASSERT_FALSE(e.pairs.empty());
  EXPECT_LE(e.pairs[0].lambda, 0.0);
}

TEST(Pencil, StationaryPointIsEigenvector) {
  // x = −(A + λI)⁻¹a with ‖x‖² = δ: (x; (A + λI)⁻¹x) is in the kernel of M0 + λM1.
  const SymOp A = diag({-2.0, 0.0});
  const Vector a = vec({1.0, 0.0});
  const TRSPencil P = build_pencil(A, a, 1.0);
  for (double lam : {1.0, 3.0}) {
    Vector x(2);
    x << -1.0 / (lam - 2.0), 0.0;
    Vector y(4);
    y << x, x / (lam - 2.0);
    EXPECT_LE((P.apply_M0(y) + lam * P.apply_M1(y)).norm(), 1e-14);
  }
}

TEST(Pencil, ShiftInvertMatchesDenseOnLargerInstance) {
  const PlantedTRS L = gen_lngm_trs(120, 0.05, 21, 2.0, MuRule::uniform);
  const TRSPencil P = build_pencil(SymOp::sparse(L.A), L.a, L.delta);
  const PencilEigs dense = top_real_eigs(P, 2);
  SolverConfig cfg;
  cfg.dense_crossover = 10;
  const PencilEigs krylov = top_real_eigs(P, 2, cfg);
  ASSERT_GE(dense.pairs.size(), 2u);
  ASSERT_GE(krylov.pairs.size(), 2u);
  EXPECT_FALSE(krylov.dense);
  EXPECT_NEAR(dense.pairs[1].lambda, L.lambda_lngm, 1e-9 * std::max(1.0, L.lambda_lngm));
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(krylov.pairs[i].lambda, dense.pairs[i].lambda, 1e-9 * std::max(1.0, std::abs(dense.pairs[i].lambda)));
    EXPECT_LE(krylov.pairs[i].residual, 1e-7 * std::max(1.0, std::abs(krylov.pairs[i].lambda)));
  }
}

TEST(Pencil, DistantSecondEigenvalueIsReportedAsShortfall) {
  // Here the second real eigenvalue sits at about −9.35, behind many complex pairs,
  // far outside any interval that could hold a local non-global multiplier.
  SplitMix64 rng(21);
  const Index n = 120;
  const SymOp A = SymOp::sparse(random_sparse_symmetric(n, 0.05, rng));
  const Vector a = rng.normal_vector(n);
  const TRSPencil P = build_pencil(A, a, 2.0);
  const PencilEigs dense = top_real_eigs(P, 2);
  SolverConfig cfg;
  cfg.dense_crossover = 10;
  const PencilEigs krylov = top_real_eigs(P, 2, cfg);
  ASSERT_EQ(dense.pairs.size(), 2u);
  EXPECT_LT(dense.pairs[1].lambda, 0.0);
  ASSERT_GE(krylov.pairs.size(), 1u);
  EXPECT_NEAR(krylov.pairs[0].lambda, dense.pairs[0].lambda, 1e-9 * std::abs(dense.pairs[0].lambda));
  EXPECT_TRUE(krylov.shortfall || krylov.pairs.size() == 2u);
}

TEST(Pencil, BlockRelationsHoldForEigenvectors) {
  SplitMix64 rng(4);
  const Index n = 10;
  const SymOp A = SymOp::from_dense(random_symmetric(n, rng));
  const Vector a = rng.normal_vector(n);
  const double delta = 1.5;
  const PencilEigs e = top_real_eigs(build_pencil(A, a, delta), 2);
  for (const auto& p : e.pairs) {
    const double s = std::max(p.y1.norm(), p.y2.norm());
    EXPECT_LE((A.apply(p.y2) + p.lambda * p.y2 - p.y1).norm(), 1e-8 * s * std::max(1.0, std::abs(p.lambda)));
    EXPECT_LE((A.apply(p.y1) + p.lambda * p.y1 - a * (a.dot(p.y2) / delta)).norm(),
              1e-8 * s * std::max(1.0, std::abs(p.lambda)) * std::max(1.0, a.squaredNorm()));
  }
}
