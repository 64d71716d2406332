// Trust-region subproblem  min xᵀAx + 2aᵀx  s.t.  xᵀBx ≤ δ  via the pencil.
#pragma once

#include "etrs/pencil.hpp"

#include <string_view>

namespace etrs {

enum class TRSCase { interior, boundary_easy, boundary_hard };

inline std::string_view to_string(TRSCase c) {
  switch (c) {
    case TRSCase::interior: return "interior";
    case TRSCase::boundary_easy: return "boundary_easy";
    case TRSCase::boundary_hard: return "boundary_hard";
  }
  return "?";
}

struct TRSSolution {
  Vector x;
  double lambda = 0.0;
  TRSCase kind = TRSCase::interior;
  double obj = 0.0;
  double kkt1 = 0.0;  ///< ‖(A + λB)x + a‖∞
  double kkt2 = 0.0;  ///< λ(xᵀBx − δ)
  /// Pencil eigenpairs computed on the way (empty for interior or a = 0).
  std::optional<PencilEigs> pencil;
  double lam_min = 0.0;  ///< smallest eigenvalue of (A, B)
};

struct TRSOptions {
  /// In the hard case, pick the boundary point minimizing tᵀx.
  const Vector* tie_break = nullptr;
  /// Solver factory for A + σB used by the pencil's shift-invert path.
  ShiftSolverFactory shift_solver;
  /// Number of top real pencil eigenvalues to compute (2 lets the LNGM reuse them).
  int pencil_k = 1;
  /// Smallest k eigenpairs of (A, B) with B-orthonormal vectors, used instead of
  /// the default Lanczos above the dense crossover.
  std::function<SmallestEigs(Index k)> eig_solver;
};

namespace detail {

inline double b_norm2(const SymOp& B, const Vector& x) { return B.is_identity() ? x.squaredNorm() : x.dot(B.apply(x)); }

inline void finish_trs(const SymOp& A, const Vector& a, double delta, const SymOp& B, TRSSolution& s) {
  const Vector Ax = A.apply(s.x);
  const Vector Bx = B.is_identity() ? s.x : B.apply(s.x);
  s.obj = quadratic_value(s.x, Ax, a);
  s.kkt1 = (Ax + s.lambda * Bx + a).lpNorm<Eigen::Infinity>();
  s.kkt2 = s.lambda * (s.x.dot(Bx) - delta);
}

/// Solves (A + σB) x = r for a positive definite A + σB, densely or by PCG.
inline std::optional<Vector> spd_solve(const SymOp& A, const SymOp& B, double sigma, const Vector& r,
                                       const SolverConfig& cfg) {
  const Index n = A.n();
  if (n <= cfg.dense_crossover) {
    Eigen::LLT<Matrix> llt(A.to_dense() + sigma * B.to_dense());
    if (llt.info() != Eigen::Success) return std::nullopt;
    return Vector(llt.solve(r));
  }
  CGOptions opt;
  if (B.is_solvable()) opt.precond = [&](const Vector& v) { return B.solve(v); };
  const CGResult res = conjugate_gradient([&](const Vector& x) { return Vector(A.apply(x) + sigma * B.apply(x)); }, r,
                                          std::min(cfg.cg_tol, 1e-13), cg_iteration_cap(cfg, n), opt);
  if (!res.converged) return std::nullopt;
  return res.x;
}

}  // namespace detail

/// Boundary solution in the hard case: x = q + ηv with (A + λB + αΣBvᵢvᵢᵀB) q = −a
/// and v in the null space spanned by the B-orthonormal columns of V.
inline Vector recover_hard_case(const SymOp& A, const SymOp& B, double lambda, const Vector& a, double delta,
                                const Matrix& V, const SolverConfig& cfg = {}, const Vector* tie_break = nullptr) {
  const Index n = A.n();
  detail::require(V.rows() == n && V.cols() >= 1, "recover_hard_case: null basis must have n rows and >= 1 column");
  detail::require(a.size() == n && delta > 0.0, "recover_hard_case: bad a or delta");
  const Matrix BV = B.is_identity() ? V : [&] {
    Matrix M(n, V.cols());
    for (Index j = 0; j < V.cols(); ++j) M.col(j) = B.apply(V.col(j));
    return M;
  }();
  const double alpha = std::max(1.0, std::abs(lambda));

  Vector q = Vector::Zero(n);
  if (a.squaredNorm() > 0.0) {
    if (n <= cfg.dense_crossover) {
      Matrix H = A.to_dense() + lambda * B.to_dense() + alpha * BV * BV.transpose();
      Eigen::LDLT<Matrix> ldlt(H);
      q = ldlt.solve(-a);
    } else {
      auto H = [&](const Vector& x) {
        return Vector(A.apply(x) + lambda * B.apply(x) + alpha * (BV * (BV.transpose() * x)));
      };
      CGOptions opt;
      if (B.is_solvable()) opt.precond = [&](const Vector& v) { return B.solve(v); };
      const CGResult r = conjugate_gradient(H, -a, std::min(cfg.cg_tol, 1e-13), cg_iteration_cap(cfg, n), opt);
      if (!r.converged) throw ConvergenceError("recover_hard_case: CG on the deflated system failed", r.residual);
      q = r.x;
    }
  }

  Vector v = V.col(0);
  if (tie_break) {
    const Vector z = V.transpose() * (*tie_break);
    if (z.norm() > 0.0) v = -(V * z) / z.norm();
  }
  const Vector Bq = B.is_identity() ? q : B.apply(q);
  const double vBv = detail::b_norm2(B, v);
  const double c1 = v.dot(Bq) / vBv;
  const double c0 = (q.dot(Bq) - delta) / vBv;
  const double disc = c1 * c1 - c0;
  if (disc < -1e-12 * (std::abs(c0) + c1 * c1 + 1.0))
    throw Error(fmt::format("recover_hard_case: qᵀBq = {:.6g} exceeds delta = {:.6g}; lambda is not the hard-case multiplier",
                            q.dot(Bq), delta));
  const double eta = -c1 + std::sqrt(std::max(0.0, disc));
  return q + eta * v;
}

namespace detail {

inline TRSSolution solve_trs_core(const SymOp& A, const Vector& a, double delta, const SymOp& B,
                                  const SolverConfig& cfg, const TRSOptions& opt) {
  const Index n = A.n();
  TRSSolution s;
  const bool dense = n <= cfg.dense_crossover;
  const Index kev = dense ? n : std::min<Index>(n, 3);
  const SmallestEigs se = !dense && opt.eig_solver ? opt.eig_solver(kev) : smallest_eigs(A, &B, kev, cfg);
  s.lam_min = se.values[0];

  auto null_basis = [&] {
    const double tol = cfg.null_cluster_tol * std::max(1.0, std::abs(s.lam_min));
    Index m = 1;
    while (m < se.values.size() && se.values[m] - s.lam_min <= tol) ++m;
    return Matrix(se.vectors.leftCols(m));
  };

  if (a.squaredNorm() == 0.0) {
    if (s.lam_min < 0.0) {
      const Matrix V = null_basis();
      s.x = recover_hard_case(A, B, -s.lam_min, a, delta, V, cfg, opt.tie_break);
      s.lambda = -s.lam_min;
      s.kind = TRSCase::boundary_hard;
    } else {
      s.x = Vector::Zero(n);
      s.lambda = 0.0;
      s.kind = TRSCase::interior;
    }
    finish_trs(A, a, delta, B, s);
    return s;
  }

  // Interior candidate: for A ≻ 0 a feasible Newton point is the global minimizer.
  if (s.lam_min > 0.0) {
    if (auto x0 = spd_solve(A, B, 0.0, -a, cfg); x0 && b_norm2(B, *x0) <= delta) {
      s.x = *x0;
      s.lambda = 0.0;
      s.kind = TRSCase::interior;
      finish_trs(A, a, delta, B, s);
      return s;
    }
  }

  // With ‖a‖_{B⁻¹}/√δ negligible the multiplier is −λ_min up to that bound and
  // any shift above it would sit on an eigenvalue.
  if (s.lam_min < 0.0) {
    const double bound = std::sqrt(std::max(0.0, a.dot(detail::metric_solve(B, a))) / delta);
    if (bound <= cfg.hard_tol * std::max(1.0, std::abs(s.lam_min))) {
      try {
        s.x = recover_hard_case(A, B, -s.lam_min, a, delta, null_basis(), cfg, opt.tie_break);
        s.lambda = -s.lam_min;
        s.kind = TRSCase::boundary_hard;
        finish_trs(A, a, delta, B, s);
        return s;
      } catch (const Error&) {
      }
    }
  }

  const TRSPencil P = build_pencil(A, a, delta, B);
  PencilHints hints;
  hints.lam_min = s.lam_min;
  hints.shift_solver = opt.shift_solver;
  s.pencil = top_real_eigs(P, opt.pencil_k, cfg, hints);
  if (s.pencil->pairs.empty()) throw ConvergenceError("solve_trs: pencil has no real eigenvalue in the search window", kInf);
  const RealEigPair& top = s.pencil->pairs.front();
  const double y1n = std::sqrt(top.y1.squaredNorm() / (top.y1.squaredNorm() + top.y2.squaredNorm()));

  bool hard = y1n <= cfg.tau;
  if (hard) {
    try {
      s.x = recover_hard_case(A, B, -s.lam_min, a, delta, null_basis(), cfg, opt.tie_break);
      s.lambda = std::max(0.0, -s.lam_min);
      s.kind = TRSCase::boundary_hard;
    } catch (const Error&) {
      hard = false;  // min-norm point outside the ball: the eigenvector recovery applies
    }
  }
  if (!hard) {
    const double ay2 = a.dot(top.y2);
    const double y1b = std::sqrt(b_norm2(B, top.y1));
    if (y1b == 0.0) throw InconsistencyError("solve_trs: first eigenvector block vanished outside the hard case");
    s.x = (ay2 >= 0.0 ? -1.0 : 1.0) * std::sqrt(delta) / y1b * top.y1;
    s.lambda = std::max(0.0, top.lambda);
    s.kind = TRSCase::boundary_easy;
  }
  finish_trs(A, a, delta, B, s);
  return s;
}

}  // namespace detail

/// Global minimizer of xᵀAx + 2aᵀx over xᵀBx ≤ δ. B must be the identity or
/// diagonal-plus-rank-one and positive definite.
inline TRSSolution solve_trs(const SymOp& A, const Vector& a, double delta, const SymOp& B,
                             const SolverConfig& cfg = {}, const TRSOptions& opt = {}) {
  const Index n = A.n();
  detail::require(n >= 1, "solve_trs: empty problem");
  detail::require(a.size() == n && B.n() == n, "solve_trs: dimension mismatch");
  detail::require(delta > 0.0 && std::isfinite(delta), fmt::format("solve_trs: delta must be positive (got {})", delta));
  detail::require_finite(a, "solve_trs: a");
  detail::require(B.is_identity() || B.kind() == SymOp::Kind::diag_rank_one,
                  "solve_trs: B must be the identity or diagonal-plus-rank-one");
  if (opt.tie_break) detail::require(opt.tie_break->size() == n, "solve_trs: tie-break vector has wrong length");

  if (B.is_identity()) return detail::solve_trs_core(A, a, delta, B, cfg, opt);

  // Symmetric diagonal equilibration: B' = SBS has unit diagonal.
  const Vector diagB = B.diagonal();
  detail::require((diagB.array() > 0.0).all(), "solve_trs: B must be positive definite");
  const Vector s = diagB.cwiseSqrt().cwiseInverse();
  SymOp As = SymOp::identity(0);
  if (const SparseMatrix* Asp = A.sparse_matrix())
    As = SymOp::sparse(SparseMatrix(s.asDiagonal() * (*Asp) * s.asDiagonal()));
  else
    As = SymOp::congruence(std::make_shared<DiagMap>(s), A);
  const SymOp Bs =
      SymOp::diag_rank_one(B.drk_d().cwiseProduct(s.cwiseAbs2()), B.drk_u().cwiseProduct(s), B.drk_sigma());
  const Vector as = a.cwiseProduct(s);

  TRSOptions o2 = opt;
  Vector tie;
  if (opt.tie_break) {
    tie = opt.tie_break->cwiseProduct(s);
    o2.tie_break = &tie;
  }
  if (opt.shift_solver) {
    // (S(A + σB)S)⁻¹ = S⁻¹(A + σB)⁻¹S⁻¹.
    o2.shift_solver = [inner = opt.shift_solver, sinv = Vector(s.cwiseInverse())](double sigma) -> LinearSolve {
      LinearSolve f = inner(sigma);
      if (!f) return {};
      return [f, sinv](const Vector& r) { return Vector(sinv.cwiseProduct(f(sinv.cwiseProduct(r)))); };
    };
  }
  if (opt.eig_solver) {
    // Eigenvectors of (SAS, SBS) are S⁻¹ times those of (A, B).
    o2.eig_solver = [inner = opt.eig_solver, sinv = Vector(s.cwiseInverse())](Index k) {
      SmallestEigs e = inner(k);
      e.vectors = sinv.asDiagonal() * e.vectors;
      return e;
    };
  }
  TRSSolution out = detail::solve_trs_core(As, as, delta, Bs, cfg, o2);
  out.x = out.x.cwiseProduct(s);
  detail::finish_trs(A, a, delta, B, out);
  return out;
}

inline TRSSolution solve_trs(const SymOp& A, const Vector& a, double delta, const SolverConfig& cfg = {},
                             const TRSOptions& opt = {}) {
  return solve_trs(A, a, delta, SymOp::identity(A.n()), cfg, opt);
}

}  // namespace etrs
