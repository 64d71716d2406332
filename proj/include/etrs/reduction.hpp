// Elimination of an active constraint bᵀx = β through a sparse null-space basis.
//
// With the entries of b sorted so that |b₁| ≥ … ≥ |b_r| > 0 = b_{r+1} = …, the
// basis W ∈ R^{n×(n−1)} has columns
//   j < r−1 :  −e_{p₁}/b₁ + e_{p_{j+2}}/b_{p_{j+2}}
//   j ≥ r−1 :  e_{p_{j+2}}
// (1-based positions p in the sorted order), so bᵀW = 0 and
// WᵀW = Diag(b̄² ⊕ 1) + b₁⁻² ēēᵀ with b̄ the reciprocals and ē = (1,…,1,0,…,0).
#pragma once

#include "etrs/pencil.hpp"
#include "etrs/problem.hpp"

#include <algorithm>
#include <numeric>

namespace etrs {

class NullBasis final : public RectMap {
 public:
  std::vector<Index> perm;  ///< indices of b sorted by decreasing |b|, ties by index
  Index r = 0;              ///< number of nonzeros in b
  double b1 = 0.0;          ///< leading entry b[perm[0]]
  Vector bbar;              ///< 1 / b[perm[j]], j = 1..r−1

  Index rows() const override { return static_cast<Index>(perm.size()); }
  Index cols() const override { return rows() - 1; }

  Vector apply(const Vector& y) const override {
    const Index n = rows();
    Vector x(n);
    const Index k = r - 1;
    x[perm[0]] = -y.head(k).sum() / b1;
    for (Index j = 0; j < k; ++j) x[perm[j + 1]] = y[j] * bbar[j];
    for (Index j = k; j < n - 1; ++j) x[perm[j + 1]] = y[j];
    return x;
  }

  Vector apply_transpose(const Vector& x) const override {
    const Index n = rows();
    Vector y(n - 1);
    const Index k = r - 1;
    const double lead = -x[perm[0]] / b1;
    for (Index j = 0; j < k; ++j) y[j] = lead + x[perm[j + 1]] * bbar[j];
    for (Index j = k; j < n - 1; ++j) y[j] = x[perm[j + 1]];
    return y;
  }

  /// WᵀW as a diagonal-plus-rank-one operator.
  SymOp gram() const {
    const Index m = cols();
    Vector d = Vector::Ones(m);
    Vector u = Vector::Zero(m);
    d.head(r - 1) = bbar.cwiseAbs2();
    u.head(r - 1).setOnes();
    return SymOp::diag_rank_one(std::move(d), std::move(u), 1.0 / (b1 * b1));
  }
};

inline std::shared_ptr<const NullBasis> build_nullspace(const Vector& b) {
  const Index n = b.size();
  detail::require(n >= 2, "build_nullspace: need n >= 2");
  detail::require_finite(b, "build_nullspace: b");
  auto nb = std::make_shared<NullBasis>();
  nb->perm.resize(n);
  std::iota(nb->perm.begin(), nb->perm.end(), Index{0});
  std::stable_sort(nb->perm.begin(), nb->perm.end(),
                   [&](Index i, Index j) { return std::abs(b[i]) > std::abs(b[j]); });
  nb->r = static_cast<Index>((b.array() != 0.0).count());
  detail::require(nb->r >= 1, "build_nullspace: b must be nonzero");
  nb->b1 = b[nb->perm[0]];
  nb->bbar.resize(nb->r - 1);
  for (Index j = 1; j < nb->r; ++j) nb->bbar[j - 1] = 1.0 / b[nb->perm[j]];
  return nb;
}

/// x̂ = βb/‖b‖², the minimum-norm point of the hyperplane; requires ‖x̂‖² < δ.
inline Vector particular_solution(const Vector& b, double beta, double delta) {
  const double bb = b.squaredNorm();
  detail::require(bb > 0.0, "particular_solution: b must be nonzero");
  Vector xh = beta == 0.0 ? Vector(Vector::Zero(b.size())) : Vector((beta / bb) * b);
  if (xh.squaredNorm() >= delta)
    throw std::invalid_argument(fmt::format(
        "particular_solution: hyperplane does not cut the open ball (‖x̂‖² = {:.6g} >= delta = {:.6g})",
        xh.squaredNorm(), delta));
  return xh;
}

/// The scaled TRS  min yᵀÂy + 2(Âg + â)ᵀy  s.t.  yᵀBy ≤ radius  on the hyperplane.
struct ReducedProblem {
  std::shared_ptr<const NullBasis> nb;
  SymOp Ahat = SymOp::identity(0);  ///< WᵀAW
  Vector ahat;                      ///< Wᵀ(a + Ax̂)
  SymOp B = SymOp::identity(0);     ///< WᵀW
  Vector bhat;                      ///< 2Wᵀx̂
  double delta_hat = 0.0;           ///< δ − ‖x̂‖²
  Vector g;                         ///< 2Bg = −b̂
  Vector xhat;
  double constant = 0.0;            ///< (Ax̂ + 2a)ᵀx̂, the objective offset

  /// Linear term of the shifted problem, Âg + â.
  Vector linear() const { return Ahat.apply(g) + ahat; }
  /// Radius δ̂ − gᵀBg − b̂ᵀg of the shifted problem.
  double radius() const { return delta_hat - g.dot(B.apply(g)) - bhat.dot(g); }
};

inline ReducedProblem reduce(const ETRSInstance& inst, std::shared_ptr<const NullBasis> nb, const Vector& xhat) {
  detail::require(nb != nullptr && nb->rows() == inst.n(), "reduce: null basis does not match the instance");
  detail::require(xhat.size() == inst.n(), "reduce: x̂ has wrong length");
  ReducedProblem rp;
  rp.nb = nb;
  rp.xhat = xhat;
  rp.Ahat = SymOp::congruence(nb, inst.A);
  const Vector Ax = inst.A.apply(xhat);
  rp.ahat = nb->apply_transpose(inst.a + Ax);
  rp.B = nb->gram();
  rp.bhat = 2.0 * nb->apply_transpose(xhat);
  rp.delta_hat = inst.delta - xhat.squaredNorm();
  rp.g = rp.B.solve(-0.5 * rp.bhat);
  rp.constant = (Ax + 2.0 * inst.a).dot(xhat);
  const double rad = rp.radius();
  if (!(rad > 0.0))
    throw Error(fmt::format("reduce: nonpositive reduced radius {:.6g}; the hyperplane misses the open ball", rad));
  return rp;
}

inline Vector lift(const Vector& y, const NullBasis& nb, const Vector& g, const Vector& xhat) {
  return xhat + nb.apply(y + g);
}

/// Solver factory for Wᵀ(A + σI)W. With x = Ww the system is (A + σI) restricted
/// to b⊥, solved either through the bordered system
///   (A + σI)x = WB⁻¹r − bν,  bᵀx = 0,  w = B⁻¹Wᵀx
/// when A + σI is positive definite with a small sparse factor, or by CG on b⊥.
inline ShiftSolverFactory make_reduced_shift_solver(const SymOp& A, const Vector& b,
                                                    std::shared_ptr<const NullBasis> nb, const SymOp& B,
                                                    const SolverConfig& cfg = {}) {
  auto u = std::make_shared<Vector>(b.normalized());
  return [A, b, u, nb, B, cfg](double sigma) -> LinearSolve {
    if (const SparseMatrix* As = A.sparse_matrix()) {
      const Index n = As->rows();
      SparseMatrix I(n, n);
      I.setIdentity();
      auto f = detail::try_sparse_factor(SparseMatrix(*As + sigma * I));
      if (f && (f->vectorD().array() > 0.0).all()) {
        auto Kb = std::make_shared<Vector>(f->solve(b));
        const double bKb = b.dot(*Kb);
        return [f, Kb, bKb, b, nb, B](const Vector& r) {
          const Vector Kf = f->solve(nb->apply(B.solve(r)));
          const double nu = b.dot(Kf) / bKb;
          return B.solve(nb->apply_transpose(Vector(Kf - nu * (*Kb))));
        };
      }
    }
    LinearSolve precond;
    const Vector dA = A.diagonal();
    if (dA.size() == b.size() && ((dA.array() + sigma) > 0.0).all()) {
      const Vector inv = (dA.array() + sigma).inverse().matrix();
      precond = [inv](const Vector& r) { return Vector(inv.cwiseProduct(r)); };
    }
    const double tol = cfg.cg_tol;
    const Index maxit = cg_iteration_cap(cfg, b.size());
    return [A, u, nb, B, sigma, tol, maxit, precond](const Vector& r) {
      CGOptions opt;
      opt.deflate = u.get();
      opt.precond = precond;
      const CGResult res = conjugate_gradient([&](const Vector& x) { return Vector(A.apply(x) + sigma * x); },
                                              nb->apply(B.solve(r)), tol, maxit, opt);
      if (!res.converged)
        throw ConvergenceError(fmt::format("reduced shift solve with sigma={:.6g} failed after {} iterations{}", sigma,
                                           res.iterations, res.breakdown ? " (nonpositive curvature)" : ""),
                               res.residual);
      return B.solve(nb->apply_transpose(res.x));
    };
  };
}

/// Smallest eigenpairs of (WᵀAW, WᵀW), computed as eigenpairs of A compressed
/// to b⊥ so that the conditioning of WᵀW does not enter the iteration.
inline std::function<SmallestEigs(Index)> make_reduced_eig_solver(const SymOp& A, const Vector& b,
                                                                  std::shared_ptr<const NullBasis> nb,
                                                                  const SymOp& B, const SolverConfig& cfg = {}) {
  return [A, u = Vector(b.normalized()), nb, B, cfg](Index k) {
    // The b direction is pushed above the spectrum of A.
    const double lift = 2.0 * A.norm_estimate() + 1.0;
    auto op = [&](const Vector& x) {
      Vector px = x - u.dot(x) * u;
      Vector y = A.apply(px);
      y -= u.dot(y) * u;
      y += (lift * u.dot(x)) * u;
      return y;
    };
    krylov::SymmetricOptions opt;
    opt.k = k;
    opt.tol = cfg.eig_tol;
    opt.max_restarts = cfg.max_restarts;
    opt.scale = lift;
    const krylov::SymmetricResult r = krylov::lanczos_smallest(u.size(), op, {}, opt);
    if (!r.converged)
      throw ConvergenceError(fmt::format("reduced eigensolver: Lanczos did not converge after {} restarts", r.restarts),
                             r.residuals.maxCoeff());
    SmallestEigs out;
    out.values = r.values;
    out.vectors.resize(nb->cols(), k);
    for (Index j = 0; j < k; ++j) {
      Vector x = r.vectors.col(j);
      x -= u.dot(x) * u;
      out.vectors.col(j) = B.solve(nb->apply_transpose(x));  // Wy = x, so yᵀBy = ‖x‖² = 1
    }
    out.residual = r.residuals.maxCoeff();
    return out;
  };
}

}  // namespace etrs
