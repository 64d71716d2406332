// The 2n×2n pencil M0 + λM1 of the (scaled) trust-region subproblem and
// extraction of its largest real generalized eigenvalues.
//
//   M0 = [ −B      A    ]      M1 = [ 0  B ]
//        [  A  −aaᵀ/δ   ]           [ B  0 ]
//
// Eigenproblem: M0 y = −λ M1 y, y = (y1; y2).
#pragma once

#include "etrs/operators.hpp"

#include <Eigen/LU>
#include <Eigen/OrderingMethods>

#include <algorithm>
#include <complex>
#include <optional>

namespace etrs {

struct TRSPencil {
  SymOp A;
  SymOp B;
  Vector a;
  double delta = 0.0;

  Index n() const { return A.n(); }

  Vector apply_M0(const Vector& y) const {
    const Index m = n();
    const auto y1 = y.head(m);
    const auto y2 = y.tail(m);
    Vector out(2 * m);
    out.head(m) = A.apply(y2) - B.apply(y1);
    out.tail(m) = A.apply(y1) - (a.dot(y2) / delta) * a;
    return out;
  }

  Vector apply_M1(const Vector& y) const {
    const Index m = n();
    Vector out(2 * m);
    out.head(m) = B.apply(y.tail(m));
    out.tail(m) = B.apply(y.head(m));
    return out;
  }

  Matrix dense_M0() const {
    const Index m = n();
    const Matrix Ad = A.to_dense();
    Matrix M(2 * m, 2 * m);
    M.topLeftCorner(m, m) = -B.to_dense();
    M.topRightCorner(m, m) = Ad;
    M.bottomLeftCorner(m, m) = Ad;
    M.bottomRightCorner(m, m) = -(a * a.transpose()) / delta;
    return M;
  }

  Matrix dense_M1() const {
    const Index m = n();
    const Matrix Bd = B.to_dense();
    Matrix M = Matrix::Zero(2 * m, 2 * m);
    M.topRightCorner(m, m) = Bd;
    M.bottomLeftCorner(m, m) = Bd;
    return M;
  }
};

inline TRSPencil build_pencil(const SymOp& A, const Vector& a, double delta, const SymOp& B) {
  detail::require(delta > 0.0 && std::isfinite(delta), fmt::format("build_pencil: delta must be positive (got {})", delta));
  detail::require(a.size() == A.n(), fmt::format("build_pencil: a has length {}, A has dimension {}", a.size(), A.n()));
  detail::require(B.n() == A.n(), fmt::format("build_pencil: B has dimension {}, A has dimension {}", B.n(), A.n()));
  detail::require_finite(a, "build_pencil: a");
  detail::require(a.squaredNorm() > 0.0, "build_pencil: a must be nonzero");
  return TRSPencil{A, B, a, delta};
}

inline TRSPencil build_pencil(const SymOp& A, const Vector& a, double delta) {
  return build_pencil(A, a, delta, SymOp::identity(A.n()));
}

struct RealEigPair {
  double lambda = 0.0;
  Vector y1;
  Vector y2;
  double residual = 0.0;  ///< ‖(M0 + λM1) y‖₂ for ‖y‖₂ = 1
};

struct PencilEigs {
  std::vector<RealEigPair> pairs;  ///< descending λ
  bool shortfall = false;          ///< fewer real eigenvalues than requested in the search window
  bool dense = false;
  double sigma = 0.0;              ///< shift used by the Krylov path
  Index restarts = 0;
};

/// Builds a solver for (A + σB) given σ; an empty result selects the default.
using ShiftSolverFactory = std::function<LinearSolve(double sigma)>;

struct PencilHints {
  std::optional<double> lam_min;    ///< smallest eigenvalue of (A, B) if already known
  ShiftSolverFactory shift_solver;  ///< overrides the default (A + σB) solver
};

namespace detail {

/// SimplicialLDLT exposing the fill predicted by its symbolic analysis.
class FillAwareLDLT : public Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> {
 public:
  Index predicted_nonzeros() const { return this->m_matrix.outerIndexPtr()[this->m_matrix.outerSize()]; }
};

/// Sparse LDLᵀ of K when its factor stays small, else nullptr.
inline std::shared_ptr<FillAwareLDLT> try_sparse_factor(const SparseMatrix& K) {
  auto f = std::make_shared<FillAwareLDLT>();
  f->analyzePattern(K);
  const Index budget = std::max<Index>(2'000'000, 40 * K.nonZeros());
  if (f->predicted_nonzeros() > budget) return nullptr;
  f->factorize(K);
  if (f->info() != Eigen::Success) return nullptr;
  return f;
}

}  // namespace detail

/// Default solver for (A + σB) with A + σB positive definite.
inline LinearSolve make_shift_solver(const SymOp& A, const SymOp& B, double sigma, const SolverConfig& cfg) {
  const Index n = A.n();
  if (n <= cfg.dense_crossover) {
    Matrix K = A.to_dense() + sigma * B.to_dense();
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(K);
    if (llt->info() == Eigen::Success) return [llt](const Vector& r) { return Vector(llt->solve(r)); };
    auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(K);
    return [lu](const Vector& r) { return Vector(lu->solve(r)); };
  }
  const bool b_identity = B.is_identity();
  if (const SparseMatrix* As = A.sparse_matrix(); As && (b_identity || B.is_solvable())) {
    // K0 = A + σ diag(d_B); the rank-one part of B is added by Sherman–Morrison.
    SparseMatrix K = *As;
    const Vector d = b_identity ? Vector(Vector::Ones(n)) : B.drk_d();
    SparseMatrix Dg(n, n);
    Dg.setIdentity();
    Dg = Dg * d.asDiagonal();
    K += sigma * Dg;
    if (auto f = detail::try_sparse_factor(K)) {
      if (b_identity || B.drk_sigma() == 0.0) return [f](const Vector& r) { return Vector(f->solve(r)); };
      const double s = sigma * B.drk_sigma();
      auto z = std::make_shared<Vector>(f->solve(B.drk_u()));
      const double denom = 1.0 + s * B.drk_u().dot(*z);
      const Vector u = B.drk_u();
      return [f, z, s, denom, u](const Vector& r) {
        Vector x = f->solve(r);
        return Vector(x - (s * u.dot(x) / denom) * (*z));
      };
    }
  }
  // Preconditioned CG: Jacobi when the diagonal is known, else the metric B.
  const double tol = std::min(cfg.cg_tol, 1e-13);
  const Index maxit = cg_iteration_cap(cfg, n);
  LinearSolve precond;
  const Vector diagA = A.diagonal();
  const Vector diagB = B.diagonal();
  if (diagA.size() == n && diagB.size() == n) {
    Vector dk = diagA + sigma * diagB;
    if ((dk.array() > 0).all()) {
      Vector inv = dk.cwiseInverse();
      precond = [inv](const Vector& r) { return Vector(inv.cwiseProduct(r)); };
    }
  }
  if (!precond && B.is_solvable()) precond = [B](const Vector& r) { return B.solve(r); };
  return [A, B, sigma, tol, maxit, precond](const Vector& r) {
    CGOptions opt;
    opt.precond = precond;
    const CGResult res =
        conjugate_gradient([&](const Vector& x) { return Vector(A.apply(x) + sigma * B.apply(x)); }, r, tol, maxit, opt);
    if (!res.converged)
      throw ConvergenceError(fmt::format("shift solve with sigma={:.6g} failed after {} iterations", sigma, res.iterations),
                             res.residual);
    return res.x;
  };
}

namespace detail {

inline Vector metric_solve(const SymOp& B, const Vector& r) {
  if (B.is_identity()) return r;
  if (B.is_solvable()) return B.solve(r);
  throw std::invalid_argument("pencil: metric B must be the identity or diagonal-plus-rank-one");
}

inline double pencil_scale(const TRSPencil& P, double lambda) {
  return P.A.norm_estimate() + P.a.squaredNorm() / P.delta + (1.0 + std::abs(lambda)) * P.B.norm_estimate();
}

inline RealEigPair make_pair(const TRSPencil& P, double lambda, Vector y) {
  const Index n = P.n();
  y.normalize();
  RealEigPair pr;
  pr.lambda = lambda;
  pr.y1 = y.head(n);
  pr.y2 = y.tail(n);
  pr.residual = (P.apply_M0(y) + lambda * P.apply_M1(y)).norm();
  return pr;
}

struct Candidate {
  std::complex<double> lambda;
  bool real;
};

/// Marks real eigenvalues; the rightmost is snapped to real when nearly so,
/// since it is real in exact arithmetic but may sit on a defective block.
inline std::vector<Candidate> classify(const std::vector<std::complex<double>>& ev, const SolverConfig& cfg) {
  std::vector<Candidate> c;
  Index right = -1;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const bool r = std::abs(ev[i].imag()) <= cfg.real_tol * std::max(1.0, std::abs(ev[i].real()));
    c.push_back({ev[i], r});
    if (right < 0 || ev[i].real() > ev[right].real()) right = static_cast<Index>(i);
  }
  if (right >= 0 && !c[right].real &&
      std::abs(ev[right].imag()) <= 1e-4 * std::max(1.0, std::abs(ev[right].real())))
    c[right].real = true;
  return c;
}

inline PencilEigs dense_top_real(const TRSPencil& P, int k, const SolverConfig& cfg) {
  const Index n = P.n();
  Matrix BinvA = P.A.to_dense();
  Vector Binva = P.a;
  if (!P.B.is_identity()) {
    Eigen::LLT<Matrix> llt(P.B.to_dense());
    if (llt.info() != Eigen::Success) throw std::invalid_argument("pencil: metric B is not positive definite");
    BinvA = llt.solve(BinvA);
    Binva = llt.solve(P.a);
  }
  // K = −M1⁻¹M0, whose ordinary eigenvalues are the pencil eigenvalues.
  Matrix K(2 * n, 2 * n);
  K.topLeftCorner(n, n) = -BinvA;
  K.topRightCorner(n, n) = (Binva * P.a.transpose()) / P.delta;
  K.bottomLeftCorner(n, n).setIdentity();
  K.bottomRightCorner(n, n) = -BinvA;
  Eigen::EigenSolver<Matrix> es(K, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("pencil: dense eigenvalue iteration failed", kInf);
  std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  auto cls = classify(ev, cfg);
  std::vector<double> reals;
  for (const auto& c : cls)
    if (c.real) reals.push_back(c.lambda.real());
  std::sort(reals.begin(), reals.end(), std::greater<>());

  PencilEigs out;
  out.dense = true;
  out.shortfall = static_cast<int>(reals.size()) < k;
  const Matrix M0 = P.dense_M0();
  const Matrix M1 = P.dense_M1();
  SplitMix64 rng(0xD15E);
  for (int i = 0; i < k && i < static_cast<int>(reals.size()); ++i) {
    const double lam = reals[i];
    // Inverse iteration with a slightly perturbed shift; a defective eigenvalue
    // can leave an exact zero pivot, in which case the perturbation grows.
    const Vector y0 = rng.normal_vector(2 * n).normalized();
    RealEigPair best;
    best.residual = kInf;
    for (double eps : {1e-11, 1e-9, 1e-7}) {
      const double mu = lam + eps * std::max(1.0, std::abs(lam));
      Eigen::PartialPivLU<Matrix> lu(M0 + mu * M1);
      Vector y = y0;
      bool ok = true;
      for (int it = 0; it < 4 && ok; ++it) {
        Vector z = lu.solve(M1 * y);
        const double nz = z.norm();
        ok = std::isfinite(nz) && nz > 0.0;
        if (ok) y = z / nz;
      }
      if (!ok) continue;
      RealEigPair pr = make_pair(P, lam, y);
      if (pr.residual < best.residual) best = std::move(pr);
      if (best.residual <= 1e-8 * pencil_scale(P, lam)) break;
    }
    if (!std::isfinite(best.residual)) best = make_pair(P, lam, y0);
    out.pairs.push_back(std::move(best));
  }
  return out;
}

}  // namespace detail

/// Shift used by the shift-invert Krylov path: just above the upper bound
/// −λ_min(A, B) + ‖a‖_{B⁻¹}/√δ on the largest real eigenvalue.
inline double pencil_shift(const TRSPencil& P, double lam_min) {
  const double bound = std::sqrt(std::max(0.0, P.a.dot(detail::metric_solve(P.B, P.a))) / P.delta);
  return -lam_min + bound * (1.0 + 1e-3) + 1e-10 * std::max(1.0, std::abs(lam_min));
}

/// The k ∈ {1, 2} largest real eigenvalues of the pencil with eigenvectors.
inline PencilEigs top_real_eigs(const TRSPencil& P, int k, const SolverConfig& cfg = {},
                                const PencilHints& hints = {}) {
  detail::require(k == 1 || k == 2, fmt::format("top_real_eigs: k must be 1 or 2 (got {})", k));
  const Index n = P.n();
  if (n <= cfg.dense_crossover) return detail::dense_top_real(P, k, cfg);

  const double lam_min = hints.lam_min ? *hints.lam_min : smallest_eigs(P.A, &P.B, 1, cfg).values[0];
  double sigma = pencil_shift(P, lam_min);
  LinearSolve Dsolve;
  if (hints.shift_solver) Dsolve = hints.shift_solver(sigma);
  if (!Dsolve) Dsolve = make_shift_solver(P.A, P.B, sigma, cfg);

  const Vector za = Dsolve(P.B.apply(Dsolve(P.a)));
  const double denom = P.delta - P.a.dot(za);
  if (std::abs(denom) <= 1e-14 * P.delta)
    throw ConvergenceError("top_real_eigs: shift coincides with a pencil eigenvalue", std::abs(denom));

  // T = (M0 + σM1)⁻¹ M1, with eigenvalues θ = 1/(σ − λ).
  auto T = [&](const Vector& x) {
    const auto x1 = x.head(n);
    const auto x2 = x.tail(n);
    const Vector Ax2 = P.A.apply(x2);
    const Vector r = P.B.apply(x1) + Ax2 + sigma * P.B.apply(x2);
    const Vector Sr = Dsolve(P.B.apply(Dsolve(r)));
    const Vector w = Sr + (P.a.dot(Sr) / denom) * za;
    Vector out(2 * n);
    out.head(n) = detail::metric_solve(P.B, P.A.apply(w)) + sigma * w - x2;
    out.tail(n) = w;
    return out;
  };

  PencilEigs out;
  out.sigma = sigma;
  for (Index nev : {Index(k == 1 ? 4 : 6), Index(16)}) {
    krylov::NonsymmetricOptions opt;
    opt.nev = nev;
    opt.tol = cfg.pencil_tol;
    opt.max_restarts = cfg.max_restarts;
    const krylov::NonsymmetricResult r = krylov::arnoldi_largest(2 * n, T, opt);
    out.restarts += r.restarts;
    std::vector<std::complex<double>> lam;
    for (Index i = 0; i < r.values.size(); ++i) lam.push_back(sigma - 1.0 / r.values[i]);
    const auto cls = detail::classify(lam, cfg);
    std::vector<Index> real_idx;
    for (Index i = 0; i < static_cast<Index>(cls.size()); ++i)
      if (cls[i].real) real_idx.push_back(i);
    std::sort(real_idx.begin(), real_idx.end(), [&](Index x, Index y) { return lam[x].real() > lam[y].real(); });
    // Accept only Ritz pairs that individually meet the tolerance.
    std::vector<Index> good;
    for (Index i : real_idx)
      if (r.residuals[i] <= std::max(cfg.pencil_tol, 1e-10) * std::abs(r.values[i])) good.push_back(i);
    if (static_cast<int>(good.size()) < k && nev < 16) continue;
    if (good.empty() && !real_idx.empty())
      throw ConvergenceError("top_real_eigs: Krylov–Schur did not converge", r.residuals.maxCoeff());
    out.pairs.clear();
    for (int i = 0; i < k && i < static_cast<int>(good.size()); ++i) {
      const Index c = good[i];
      Eigen::VectorXcd z = r.vectors.col(c);
      Index imax;
      z.cwiseAbs().maxCoeff(&imax);
      z *= std::conj(z[imax]) / std::abs(z[imax]);
      out.pairs.push_back(detail::make_pair(P, lam[c].real(), z.real()));
    }
    out.shortfall = static_cast<int>(out.pairs.size()) < k;
    break;
  }
  return out;
}

}  // namespace etrs
