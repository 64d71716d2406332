// Seeded property probes. Each suite runs on 50 instances and prints one line;
// the exit status is nonzero if any suite fails.

#include "etrs/etrs.hpp"

#include <fmt/core.h>

#include <functional>
#include <string>
#include <vector>

using namespace etrs;

namespace {

constexpr int kSeeds = 50;

struct Suite {
  std::string name;
  std::function<std::string(std::uint64_t)> probe;  ///< empty string on success
};

Matrix random_dense_symmetric(Index n, SplitMix64& rng) {
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j) M.col(j) = rng.normal_vector(n);
  return 0.5 * (M + M.transpose());
}

/// A different operator kind per seed so every SymOp node type is exercised.
SymOp random_op(std::uint64_t seed, SplitMix64& rng) {
  const Index n = 5 + static_cast<Index>(seed % 40);
  switch (seed % 4) {
    case 0: return SymOp::from_dense(random_dense_symmetric(n, rng));
    case 1: return SymOp::sparse(random_sparse_symmetric(n, 0.2, rng));
    case 2: return SymOp::diag_rank_one(rng.normal_vector(n), rng.normal_vector(n), rng.normal());
    default: {
      const SymOp base = SymOp::sparse(random_sparse_symmetric(n + 1, 0.3, rng));
      const SymOp inner = SymOp::shifted(base, rng.normal());
      return SymOp::congruence(build_nullspace(rng.normal_vector(n + 1)), inner);
    }
  }
}

std::string symop_probe(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const SymOp A = random_op(seed, rng);
  const Index n = A.n();
  const Vector x = rng.normal_vector(n), y = rng.normal_vector(n);
  const double alpha = rng.normal(), beta = rng.normal();
  const Vector Ax = A.apply(x), Ay = A.apply(y);
  const double scale = std::max(1.0, Ax.norm() * y.norm() + Ay.norm() * x.norm());
  if (std::abs(y.dot(Ax) - x.dot(Ay)) > 1e-12 * scale)
    return fmt::format("yᵀAx − xᵀAy = {:.3e}", y.dot(Ax) - x.dot(Ay));
  const Vector lin = A.apply(alpha * x + beta * y) - (alpha * Ax + beta * Ay);
  if (lin.norm() > 1e-12 * std::max(1.0, std::abs(alpha) * Ax.norm() + std::abs(beta) * Ay.norm()))
    return fmt::format("linearity defect {:.3e}", lin.norm());
  if ((A.to_dense() - A.to_dense().transpose()).norm() > 1e-12 * std::max(1.0, A.to_dense().norm()))
    return "materialized matrix is not symmetric";
  return {};
}

std::string nullspace_probe(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Index n = 2 + static_cast<Index>(seed % 40);
  Vector b = rng.normal_vector(n);
  if (seed % 5 == 0) b = Vector::Unit(n, static_cast<Index>(seed % n)) * (1.0 + rng.uniform());
  const auto nb = build_nullspace(b);
  const Matrix W = nb->to_dense();
  const double ortho = (b.transpose() * W).lpNorm<Eigen::Infinity>();
  if (ortho > 1e-12 * b.norm()) return fmt::format("‖bᵀW‖∞ = {:.3e}", ortho);
  const Index rank = Eigen::FullPivLU<Matrix>(W).rank();
  if (rank != n - 1) return fmt::format("rank(W) = {}, expected {}", rank, n - 1);
  return {};
}

std::string reduction_probe(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Index n = 3 + static_cast<Index>(seed % 30);
  ETRSInstance inst;
  inst.A = SymOp::from_dense(random_dense_symmetric(n, rng));
  inst.a = rng.normal_vector(n);
  inst.b = rng.normal_vector(n);
  inst.delta = 1.0 + 4.0 * rng.uniform();
  inst.beta = rng.uniform(-0.8, 0.8) * std::sqrt(inst.delta) * inst.b.norm();
  const auto nb = build_nullspace(inst.b);
  const ReducedProblem rp = reduce(inst, nb, particular_solution(inst.b, inst.beta, inst.delta));
  for (int k = 0; k < 5; ++k) {
    const Vector z = rng.normal_vector(n - 1);
    const Vector x = lift(z, *nb, Vector::Zero(n - 1), rp.xhat);
    const double scale = std::max(1.0, std::abs(inst.objective(x)));
    if (std::abs(inst.b.dot(x) - inst.beta) > 1e-10 * (std::abs(inst.beta) + inst.b.norm() * x.norm()))
      return fmt::format("bᵀx − β = {:.3e}", inst.b.dot(x) - inst.beta);
    const double qr = z.dot(rp.Ahat.apply(z)) + 2.0 * rp.ahat.dot(z) + rp.constant;
    if (std::abs(qr - inst.objective(x)) > 1e-10 * scale)
      return fmt::format("objective mismatch {:.3e}", qr - inst.objective(x));
    const double ball = z.dot(rp.B.apply(z)) + rp.bhat.dot(z) - rp.delta_hat;
    if (std::abs(ball - (x.squaredNorm() - inst.delta)) > 1e-10 * std::max(1.0, x.squaredNorm()))
      return fmt::format("ball constraint mismatch {:.3e}", ball - (x.squaredNorm() - inst.delta));
  }
  return {};
}

std::string phi_roots_probe(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Index n = 2 + static_cast<Index>(seed % 30);
  const Matrix A = random_dense_symmetric(n, rng);
  const Vector a = rng.normal_vector(n);
  // Spread δ over several decades so zero-, one- and two-root cases all occur.
  const double delta = std::pow(10.0, rng.uniform(-3.0, 2.0));
  const OracleLNGM o = oracle_lngm(dense_eig(A, a), a, delta);
  if (o.roots.size() > 2) return fmt::format("{} roots of φ = δ in the interval", o.roots.size());
  return {};
}

std::vector<ETRSInstance> failing_instances(std::uint64_t seed) {
  std::vector<ETRSInstance> out;
  out.push_back(generate_mixed(MixedCategory::duality_fails, 3 + static_cast<Index>(seed % 20), seed));
  out.push_back(generate_mixed(MixedCategory::lngm_present, 3 + static_cast<Index>(seed % 20), seed));
  out.push_back(generate({InstanceClass::IV, 20 + static_cast<Index>(seed % 30), 0.3, seed, std::nullopt}).inst);
  return out;
}

std::string witness_probe(std::uint64_t seed) {
  int fails = 0;
  for (const ETRSInstance& inst : failing_instances(seed)) {
    const ExtremeEigs e = extreme_eigs(inst.A);
    const DualityCertificate c = check_strong_duality(inst, e);
    if (c.verdict != DualityVerdict::fails) continue;
    ++fails;
    if (!(c.mu > 0.0)) return fmt::format("μ = {} is not positive", c.mu);
    const double lambda = -e.lambda1;
    const Vector rhs = -2.0 * inst.a - c.mu * inst.b;
    for (const Vector* x : {&c.x1, &c.x2}) {
      if (std::abs(x->squaredNorm() - inst.delta) > 1e-8 * std::max(1.0, inst.delta))
        return fmt::format("‖x‖² − δ = {:.3e}", x->squaredNorm() - inst.delta);
      const Vector r = 2.0 * (inst.A.apply(*x) + lambda * *x) - rhs;
      if (r.norm() > 1e-8 * std::max(1.0, rhs.norm()))
        return fmt::format("stationarity residual {:.3e}", r.norm());
    }
    const double s = (inst.b.dot(c.x1) - inst.beta) * (inst.b.dot(c.x2) - inst.beta);
    if (!(s < 0.0)) return fmt::format("witnesses do not straddle the hyperplane (product {:.3e})", s);
  }
  if (fails == 0) return "no instance produced a failing certificate";
  return {};
}

std::string provenance_probe(std::uint64_t seed) {
  std::vector<ETRSInstance> insts = failing_instances(seed);
  for (MixedCategory cat : kMixedCategories) insts.push_back(generate_mixed(cat, 4 + static_cast<Index>(seed % 12), seed));
  for (const ETRSInstance& inst : insts) {
    const ETRSSolution s = solve_etrs(inst);
    if (s.provenance != Provenance::lngm) continue;
    if (!s.duality || s.duality->verdict != DualityVerdict::fails)
      return "provenance lngm without a failing duality certificate";
  }
  return {};
}

}  // namespace

int main() {
  const std::vector<Suite> suites = {
      {"symop symmetry and linearity", symop_probe},
      {"null basis orthogonality and rank", nullspace_probe},
      {"reduction objective and constraint equivalence", reduction_probe},
      {"secular root count at most two", phi_roots_probe},
      {"duality witness clauses", witness_probe},
      {"lngm provenance implies duality fails", provenance_probe},
  };
  bool all = true;
  for (const Suite& s : suites) {
    int failed = 0;
    std::string first;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      std::string msg;
      try {
        msg = s.probe(seed);
      } catch (const std::exception& e) {
        msg = fmt::format("exception: {}", e.what());
      }
      if (!msg.empty()) {
        if (failed++ == 0) first = fmt::format("seed {}: {}", seed, msg);
      }
    }
    all = all && failed == 0;
    if (failed == 0)
      fmt::print("PASS  {} ({} seeds)\n", s.name, kSeeds);
    else
      fmt::print("FAIL  {} ({}/{} seeds failed; first {})\n", s.name, failed, kSeeds, first);
  }
  return all ? 0 : 1;
}
