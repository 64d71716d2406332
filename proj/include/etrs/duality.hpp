// Strong-duality test for the extended TRS.
//
// Duality fails exactly when λ₁ < 0 is simple, the stationarity system
// 2(A − λ₁I)x = −2a − μb is consistent for some μ > 0, and its two solutions on
// the sphere lie strictly on opposite sides of the hyperplane bᵀx = β.
#pragma once

#include "etrs/problem.hpp"

#include <Eigen/Cholesky>

#include <string_view>

namespace etrs {

enum class DualityVerdict { holds, fails };
enum class DualityReason { convex, multiplicity, b_orthogonal_v, mu_nonpositive, no_sign_change, witness_found };

inline std::string_view to_string(DualityVerdict v) { return v == DualityVerdict::holds ? "holds" : "fails"; }

inline std::string_view to_string(DualityReason r) {
  switch (r) {
    case DualityReason::convex: return "convex";
    case DualityReason::multiplicity: return "multiplicity";
    case DualityReason::b_orthogonal_v: return "b_orthogonal_v";
    case DualityReason::mu_nonpositive: return "mu_nonpositive";
    case DualityReason::no_sign_change: return "no_sign_change";
    case DualityReason::witness_found: return "witness_found";
  }
  return "?";
}

struct DualityCertificate {
  DualityVerdict verdict = DualityVerdict::holds;
  DualityReason reason = DualityReason::convex;
  double lambda = 0.0;  ///< −λ₁
  double mu = std::numeric_limits<double>::quiet_NaN();
  Vector x_p;
  double alpha1 = 0.0, alpha2 = 0.0;
  Vector x1, x2;
};

/// The x_p system could not be solved; the verdict is unknown.
class DualityInconclusive : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Minimum-norm solution of 2(A − λ₁I) x = rhs, with rhs ⟂ v.
inline Vector compute_xp(const SymOp& A, double lambda1, const Vector& v, const Vector& rhs,
                         const SolverConfig& cfg = {}) {
  const Index n = A.n();
  detail::require(v.size() == n && rhs.size() == n, "compute_xp: dimension mismatch");
  const double rn = rhs.norm();
  if (rn == 0.0) return Vector::Zero(n);
  const Vector u = v.normalized();
  if (std::abs(u.dot(rhs)) > 1e-8 * rn)
    throw std::invalid_argument(
        fmt::format("compute_xp: right-hand side not orthogonal to v (|vᵀrhs| = {:.3e}, ‖rhs‖ = {:.3e})",
                    std::abs(u.dot(rhs)), rn));
  const Vector r = rhs - u.dot(rhs) * u;
  Vector x;
  if (n <= cfg.dense_crossover) {
    // (A − λ₁I + γvvᵀ) is positive definite and agrees with the pseudo-inverse on v⊥.
    Matrix H = A.to_dense();
    H.diagonal().array() -= lambda1;
    H += std::max(1.0, std::abs(lambda1)) * u * u.transpose();
    Eigen::LDLT<Matrix> ldlt(H);
    x = 0.5 * ldlt.solve(r);
  } else {
    CGOptions opt;
    opt.deflate = &u;
    const CGResult res =
        conjugate_gradient([&](const Vector& z) { return Vector(2.0 * (A.apply(z) - lambda1 * z)); }, r,
                           std::min(cfg.cg_tol, 1e-12), cg_iteration_cap(cfg, n), opt);
    if (!res.converged)
      throw DualityInconclusive(fmt::format("compute_xp: CG stalled after {} iterations", res.iterations), res.residual);
    x = res.x;
  }
  x -= u.dot(x) * u;
  return x;
}

inline DualityCertificate check_strong_duality(const ETRSInstance& inst, const ExtremeEigs& eigs,
                                               const SolverConfig& cfg = {}) {
  inst.validate();
  DualityCertificate c;
  c.lambda = -eigs.lambda1;
  if (eigs.lambda1 >= 0.0) {
    c.reason = DualityReason::convex;
    return c;
  }
  if (eigs.multiplicity_flag || is_multiple(eigs.lambda1, eigs.lambda2, cfg)) {
    c.reason = DualityReason::multiplicity;
    return c;
  }
  const Vector& v = eigs.v1;
  const double vb = v.dot(inst.b);
  if (std::abs(vb) <= cfg.orth_tol * inst.b.norm()) {
    c.reason = DualityReason::b_orthogonal_v;
    return c;
  }
  // a ⟂ v (hard case) means μ = 0: both sphere points are TRS minimizers.
  const double va = v.dot(inst.a);
  c.mu = std::abs(va) <= cfg.hard_tol * inst.a.norm() ? 0.0 : -2.0 * va / vb;
  if (c.mu <= 0.0) {
    c.reason = DualityReason::mu_nonpositive;
    return c;
  }
  // Remove the rounding-level component along v before the consistency check.
  Vector rhs = -2.0 * inst.a - c.mu * inst.b;
  rhs -= v.dot(rhs) * v;
  if (rhs.norm() <= 1e-14 * (2.0 * inst.a.norm() + c.mu * inst.b.norm())) rhs.setZero();
  c.x_p = compute_xp(inst.A, eigs.lambda1, v, rhs, cfg);
  const double disc = inst.delta - c.x_p.squaredNorm() + std::pow(v.dot(c.x_p), 2);
  if (disc <= 0.0) {
    c.reason = DualityReason::no_sign_change;
    return c;
  }
  const double vx = v.dot(c.x_p);
  c.alpha1 = -vx + std::sqrt(disc);
  c.alpha2 = -vx - std::sqrt(disc);
  c.x1 = c.x_p + c.alpha1 * v;
  c.x2 = c.x_p + c.alpha2 * v;
  const double s1 = inst.b.dot(c.x1) - inst.beta;
  const double s2 = inst.b.dot(c.x2) - inst.beta;
  if (s1 * s2 < 0.0) {
    c.verdict = DualityVerdict::fails;
    c.reason = DualityReason::witness_found;
  } else {
    c.reason = DualityReason::no_sign_change;
  }
  return c;
}

}  // namespace etrs
