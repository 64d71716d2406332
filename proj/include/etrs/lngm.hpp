// Local non-global minimizer of the TRS from the second largest real pencil eigenvalue.
#pragma once

#include "etrs/pencil.hpp"

#include <string>
#include <string_view>

namespace etrs {

enum class LNGMStatus { found, none_convex, none_hard_case, none_multiplicity, none_interval, none_no_second_real };

inline std::string_view to_string(LNGMStatus s) {
  switch (s) {
    case LNGMStatus::found: return "found";
    case LNGMStatus::none_convex: return "none_convex";
    case LNGMStatus::none_hard_case: return "none_hard_case";
    case LNGMStatus::none_multiplicity: return "none_multiplicity";
    case LNGMStatus::none_interval: return "none_interval";
    case LNGMStatus::none_no_second_real: return "none_no_second_real";
  }
  return "?";
}

struct LNGMResult {
  LNGMStatus status = LNGMStatus::none_convex;
  Vector x;
  double lambda = 0.0;
  double obj = 0.0;
  double kkt1 = 0.0;
  double phi_prime = 0.0;
  bool phi_check_skipped = false;  ///< inner solve failed; candidate accepted on the interval test alone
  bool degenerate = false;         ///< φ′(λ) ≈ 0: double root of φ(λ) = δ
  std::string detail;              ///< why a candidate was rejected

  bool found() const { return status == LNGMStatus::found; }
};

struct PhiPrime {
  double value = 0.0;
  bool skipped = false;
};

/// φ′(λ) = −2 xᵀw with (A + λI)w = x, where x = −(A + λI)⁻¹a.
inline PhiPrime phi_derivative_check(const SymOp& A, const Vector& a, double lambda, const Vector& x,
                                     const SolverConfig& cfg = {}) {
  const Index n = A.n();
  detail::require(a.size() == n && x.size() == n, "phi_derivative_check: dimension mismatch");
  PhiPrime out;
  if (a.squaredNorm() == 0.0 || x.squaredNorm() == 0.0) return out;
  if (n <= cfg.dense_crossover) {
    Matrix H = A.to_dense();
    H.diagonal().array() += lambda;
    Eigen::PartialPivLU<Matrix> lu(H);
    const Vector w = lu.solve(x);
    if (!w.allFinite() || (H * w - x).norm() > 1e-8 * x.norm() * std::max(1.0, H.norm())) {
      out.skipped = true;
      return out;
    }
    out.value = -2.0 * x.dot(w);
    return out;
  }
  const MinresResult r = minres([&](const Vector& v) { return Vector(A.apply(v) + lambda * v); }, x,
                                std::min(cfg.cg_tol, 1e-12), cg_iteration_cap(cfg, n));
  if (!r.converged && r.residual > 1e-8) {
    out.skipped = true;
    return out;
  }
  out.value = -2.0 * x.dot(r.x);
  return out;
}

/// Finds the LNGM of min xᵀAx + 2aᵀx s.t. ‖x‖² ≤ δ if it exists. `pre` may carry
/// the top two real pencil eigenpairs from an earlier TRS solve.
inline LNGMResult find_lngm(const SymOp& A, const Vector& a, double delta, const ExtremeEigs& eigs,
                            const SolverConfig& cfg = {}, const PencilEigs* pre = nullptr) {
  const Index n = A.n();
  detail::require(a.size() == n, "find_lngm: dimension mismatch");
  detail::require(delta > 0.0, "find_lngm: delta must be positive");
  LNGMResult res;
  if (eigs.lambda1 >= 0.0) {
    res.status = LNGMStatus::none_convex;
    return res;
  }
  if (eigs.multiplicity_flag || is_multiple(eigs.lambda1, eigs.lambda2, cfg)) {
    res.status = LNGMStatus::none_multiplicity;
    return res;
  }
  const double anorm = a.norm();
  if (anorm == 0.0 || std::abs(eigs.v1.dot(a)) <= cfg.hard_tol * anorm) {
    res.status = LNGMStatus::none_hard_case;
    return res;
  }

  PencilEigs computed;
  if (!pre || pre->pairs.size() < 2) {
    const TRSPencil P = build_pencil(A, a, delta);
    PencilHints hints;
    hints.lam_min = eigs.lambda1;
    computed = top_real_eigs(P, 2, cfg, hints);
    pre = &computed;
  }
  if (pre->pairs.size() < 2) {
    res.status = LNGMStatus::none_no_second_real;
    return res;
  }
  const RealEigPair& p = pre->pairs[1];
  const double lo = std::max(0.0, -eigs.lambda2);
  const double hi = -eigs.lambda1;
  if (!(p.lambda > lo && p.lambda < hi)) {
    res.status = LNGMStatus::none_interval;
    res.detail = fmt::format("second real eigenvalue {:.12g} outside ({:.12g}, {:.12g})", p.lambda, lo, hi);
    return res;
  }
  const double ay2 = a.dot(p.y2);
  if (std::abs(ay2) <= 1e-14 * anorm * p.y2.norm() || p.y1.squaredNorm() == 0.0)
    throw InconsistencyError("find_lngm: aᵀy₂ vanished for an eigenvalue inside the interval");
  Vector x = (ay2 >= 0.0 ? -1.0 : 1.0) * std::sqrt(delta) / p.y1.norm() * p.y1;

  const PhiPrime pp = phi_derivative_check(A, a, p.lambda, x, cfg);
  res.phi_prime = pp.value;
  res.phi_check_skipped = pp.skipped;
  if (!pp.skipped && pp.value < -cfg.phi_prime_tol * std::max(1.0, x.squaredNorm())) {
    res.status = LNGMStatus::none_interval;
    res.detail = fmt::format("phi'({:.12g}) = {:.3e} < 0", p.lambda, pp.value);
    return res;
  }
  res.degenerate = !pp.skipped && std::abs(pp.value) <= cfg.phi_prime_tol * std::max(1.0, x.squaredNorm());
  res.status = LNGMStatus::found;
  res.lambda = p.lambda;
  const Vector Ax = A.apply(x);
  res.obj = quadratic_value(x, Ax, a);
  res.kkt1 = (Ax + p.lambda * x + a).lpNorm<Eigen::Infinity>();
  res.x = std::move(x);
  return res;
}

}  // namespace etrs
