// Structured symmetric operators, CG / MINRES, and extreme eigenpairs.
#pragma once

#include "etrs/common.hpp"
#include "etrs/krylov.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <vector>

namespace etrs {

/// A linear map R^cols → R^rows applied matrix-free.
class RectMap {
 public:
  virtual ~RectMap() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Vector apply(const Vector& y) const = 0;
  virtual Vector apply_transpose(const Vector& x) const = 0;

  Matrix to_dense() const {
    Matrix M(rows(), cols());
    for (Index j = 0; j < cols(); ++j) M.col(j) = apply(Vector::Unit(cols(), j));
    return M;
  }
};

/// Diagonal scaling x ↦ s ∘ x.
class DiagMap final : public RectMap {
 public:
  explicit DiagMap(Vector s) : s_(std::move(s)) {}
  Index rows() const override { return s_.size(); }
  Index cols() const override { return s_.size(); }
  Vector apply(const Vector& y) const override { return s_.cwiseProduct(y); }
  Vector apply_transpose(const Vector& x) const override { return s_.cwiseProduct(x); }
  const Vector& scale() const { return s_; }

 private:
  Vector s_;
};

/// Immutable symmetric operator. Copies share the underlying data.
class SymOp {
 public:
  enum class Kind { explicit_sparse, diag_rank_one, shifted, congruence };

  /// Explicit symmetric matrix, both triangles stored.
  static SymOp sparse(SparseMatrix A) {
    detail::require(A.rows() == A.cols(), fmt::format("SymOp: matrix must be square ({}x{})", A.rows(), A.cols()));
    A.makeCompressed();
    auto node = std::make_shared<Node>(Kind::explicit_sparse, A.rows());
    node->A = std::move(A);
    node->norm = 0.0;
    for (Index j = 0; j < node->A.outerSize(); ++j) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(node->A, j); it; ++it) s += std::abs(it.value());
      node->norm = std::max(node->norm, s);
    }
    return SymOp(std::move(node));
  }

  static SymOp from_dense(const Matrix& A) {
    detail::require(A.rows() == A.cols(), "SymOp: matrix must be square");
    return sparse(A.sparseView(0.0, 0.0));
  }

  /// D + σ u uᵀ with D = diag(d).
  static SymOp diag_rank_one(Vector d, Vector u, double sigma) {
    detail::require(d.size() == u.size(), "SymOp: diagonal and rank-one vectors must have equal length");
    auto node = std::make_shared<Node>(Kind::diag_rank_one, d.size());
    node->norm = (d.size() ? d.cwiseAbs().maxCoeff() : 0.0) + std::abs(sigma) * u.squaredNorm();
    node->d = std::move(d);
    node->u = std::move(u);
    node->sigma = sigma;
    node->identity = node->sigma == 0.0 && (node->d.array() == 1.0).all();
    return SymOp(std::move(node));
  }

  static SymOp identity(Index n) { return diag_rank_one(Vector::Ones(n), Vector::Zero(n), 0.0); }

  /// base + μI.
  static SymOp shifted(const SymOp& base, double mu) {
    auto node = std::make_shared<Node>(Kind::shifted, base.n());
    node->base = std::make_shared<SymOp>(base);
    node->sigma = mu;
    node->norm = base.norm_estimate() + std::abs(mu);
    return SymOp(std::move(node));
  }

  /// Wᵀ · base · W.
  static SymOp congruence(std::shared_ptr<const RectMap> W, const SymOp& base) {
    detail::require(W != nullptr, "SymOp: congruence map is null");
    detail::require(W->rows() == base.n(),
                    fmt::format("SymOp: congruence map has {} rows, base has dimension {}", W->rows(), base.n()));
    auto node = std::make_shared<Node>(Kind::congruence, W->cols());
    node->W = std::move(W);
    node->base = std::make_shared<SymOp>(base);
    SymOp op(node);
    node->norm = op.power_norm();
    return op;
  }

  Index n() const { return node_->n; }
  Kind kind() const { return node_->kind; }
  bool is_identity() const { return node_->kind == Kind::diag_rank_one && node_->identity; }

  Vector apply(const Vector& x) const {
    const Node& nd = *node_;
    if (x.size() != nd.n)
      throw std::invalid_argument(fmt::format("SymOp::apply: vector length {} != dimension {}", x.size(), nd.n));
    switch (nd.kind) {
      case Kind::explicit_sparse:
        return nd.A * x;
      case Kind::diag_rank_one:
        if (nd.identity) return x;
        return nd.d.cwiseProduct(x) + (nd.sigma * nd.u.dot(x)) * nd.u;
      case Kind::shifted:
        return nd.base->apply(x) + nd.sigma * x;
      case Kind::congruence:
        return nd.W->apply_transpose(nd.base->apply(nd.W->apply(x)));
    }
    return x;
  }
  Vector operator*(const Vector& x) const { return apply(x); }

  Matrix to_dense() const {
    const Node& nd = *node_;
    switch (nd.kind) {
      case Kind::explicit_sparse:
        return Matrix(nd.A);
      case Kind::diag_rank_one: {
        Matrix M = nd.sigma * nd.u * nd.u.transpose();
        M.diagonal() += nd.d;
        return M;
      }
      case Kind::shifted: {
        Matrix M = nd.base->to_dense();
        M.diagonal().array() += nd.sigma;
        return M;
      }
      case Kind::congruence: {
        const Matrix Wd = nd.W->to_dense();
        Matrix BW(Wd.rows(), Wd.cols());
        for (Index j = 0; j < Wd.cols(); ++j) BW.col(j) = nd.base->apply(Wd.col(j));
        Matrix M = Wd.transpose() * BW;
        return 0.5 * (M + M.transpose());
      }
    }
    return {};
  }

  /// The stored matrix for the explicit kind, else nullptr.
  const SparseMatrix* sparse_matrix() const {
    return node_->kind == Kind::explicit_sparse ? &node_->A : nullptr;
  }

  /// Diagonal of the operator; empty when not cheaply available (congruence).
  Vector diagonal() const {
    const Node& nd = *node_;
    switch (nd.kind) {
      case Kind::explicit_sparse:
        return nd.A.diagonal();
      case Kind::diag_rank_one:
        return nd.d + nd.sigma * nd.u.cwiseAbs2();
      case Kind::shifted: {
        Vector d = nd.base->diagonal();
        if (d.size()) d.array() += nd.sigma;
        return d;
      }
      case Kind::congruence:
        return {};
    }
    return {};
  }

  /// Upper bound (explicit kinds) or estimate (congruence) of the spectral norm.
  double norm_estimate() const { return node_->norm; }

  // diagonal-plus-rank-one accessors
  const Vector& drk_d() const { return expect(Kind::diag_rank_one).d; }
  const Vector& drk_u() const { return expect(Kind::diag_rank_one).u; }
  double drk_sigma() const { return expect(Kind::diag_rank_one).sigma; }
  // shifted / congruence accessors
  double shift() const { return expect(Kind::shifted).sigma; }
  const SymOp& base() const {
    if (node_->kind != Kind::shifted && node_->kind != Kind::congruence)
      throw std::logic_error("SymOp::base: operator has no base");
    return *node_->base;
  }
  const std::shared_ptr<const RectMap>& map() const { return expect(Kind::congruence).W; }

  /// True when solve() is available (diagonal-plus-rank-one with nonzero diagonal).
  bool is_solvable() const {
    return node_->kind == Kind::diag_rank_one && (node_->d.array() != 0.0).all();
  }

  /// Direct solve for the diagonal-plus-rank-one kind (Sherman–Morrison).
  Vector solve(const Vector& r) const {
    const Node& nd = expect(Kind::diag_rank_one);
    if (!is_solvable()) throw std::logic_error("SymOp::solve: diagonal has zero entries");
    if (nd.identity) return r;
    const Vector dr = r.cwiseQuotient(nd.d);
    if (nd.sigma == 0.0) return dr;
    const Vector du = nd.u.cwiseQuotient(nd.d);
    const double denom = 1.0 + nd.sigma * nd.u.dot(du);
    if (denom == 0.0) throw Error("SymOp::solve: singular diagonal-plus-rank-one operator");
    return dr - (nd.sigma * nd.u.dot(dr) / denom) * du;
  }

 private:
  struct Node {
    Node(Kind k, Index dim) : kind(k), n(dim) {}
    Kind kind;
    Index n;
    SparseMatrix A;
    Vector d, u;
    double sigma = 0.0;
    bool identity = false;
    std::shared_ptr<const SymOp> base;
    std::shared_ptr<const RectMap> W;
    double norm = 0.0;
  };

  explicit SymOp(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Node& expect(Kind k) const {
    if (node_->kind != k) throw std::logic_error("SymOp: accessor does not match operator kind");
    return *node_;
  }

  double power_norm() const {
    const Index n = node_->n;
    if (n == 0) return 0.0;
    SplitMix64 rng(0x9042);
    Vector x = rng.normal_vector(n).normalized();
    double est = 0.0;
    for (int it = 0; it < 30; ++it) {
      Vector y = apply(x);
      const double ny = y.norm();
      if (ny == 0.0) break;
      est = ny;
      x = y / ny;
    }
    return 1.1 * est;
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Iterative linear solvers

struct CGOptions {
  const Vector* x0 = nullptr;
  LinearSolve precond;               ///< applies M⁻¹; empty for none
  const Vector* deflate = nullptr;   ///< unit vector kept out of iterates and residuals
  std::vector<Vector>* history = nullptr;  ///< receives every iterate when set
};

struct CGResult {
  Vector x;
  double residual = 0.0;  ///< ‖Hx − rhs‖₂ / ‖rhs‖₂
  Index iterations = 0;
  bool converged = false;
  bool breakdown = false;  ///< nonpositive curvature pᵀHp ≤ 0
};

/// Preconditioned conjugate gradients on a callable operator. The true
/// residual is checked at convergence and the recursion restarted if it drifted.
inline CGResult conjugate_gradient(const krylov::Apply& H, const Vector& rhs, double tol, Index maxit,
                                   const CGOptions& opt = {}) {
  const Index n = rhs.size();
  CGResult out;
  auto project = [&](Vector& v) {
    if (opt.deflate) v -= opt.deflate->dot(v) * (*opt.deflate);
  };
  const double bnorm = rhs.norm();
  out.x = opt.x0 ? *opt.x0 : Vector(Vector::Zero(n));
  if (bnorm == 0.0) {
    out.x.setZero();
    out.converged = true;
    return out;
  }
  project(out.x);
  if (opt.history) opt.history->push_back(out.x);
  Vector r = rhs - H(out.x);
  project(r);
  Index it = 0;
  int refreshes = 0;
  while (true) {
    Vector z = opt.precond ? opt.precond(r) : r;
    project(z);
    Vector p = z;
    double rz = r.dot(z);
    double rnorm = r.norm();
    while (rnorm > tol * bnorm && it < maxit) {
      Vector Hp = H(p);
      project(Hp);
      const double pHp = p.dot(Hp);
      if (!(pHp > 0.0)) {
        out.breakdown = true;
        out.iterations = it;
        out.residual = rnorm / bnorm;
        return out;
      }
      const double alpha = rz / pHp;
      out.x.noalias() += alpha * p;
      r.noalias() -= alpha * Hp;
      ++it;
      if (opt.history) opt.history->push_back(out.x);
      z = opt.precond ? opt.precond(r) : r;
      project(z);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
      rnorm = r.norm();
    }
    Vector rt = rhs - H(out.x);
    project(rt);
    const double true_res = rt.norm();
    out.iterations = it;
    out.residual = true_res / bnorm;
    if (true_res <= tol * bnorm) {
      out.converged = true;
      return out;
    }
    if (it >= maxit || ++refreshes > 5) return out;
    r = rt;
  }
}

/// CG on a SymOp; throws ConvergenceError unless ‖Hx − rhs‖ ≤ tol‖rhs‖.
inline Vector cg_solve(const SymOp& H, const Vector& rhs, double tol, Index maxit) {
  detail::require(rhs.size() == H.n(), "cg_solve: dimension mismatch");
  const CGResult r = conjugate_gradient([&](const Vector& x) { return H.apply(x); }, rhs, tol, maxit);
  if (!r.converged)
    throw ConvergenceError(r.breakdown ? "cg_solve: nonpositive curvature, operator not positive definite"
                                       : fmt::format("cg_solve: no convergence in {} iterations", r.iterations),
                           r.residual);
  return r.x;
}

struct MinresResult {
  Vector x;
  double residual = 0.0;  ///< true relative residual
  Index iterations = 0;
  bool converged = false;
};

/// MINRES for symmetric, possibly indefinite systems.
inline MinresResult minres(const krylov::Apply& H, const Vector& b, double tol, Index maxit) {
  const Index n = b.size();
  MinresResult out;
  out.x = Vector::Zero(n);
  const double beta1 = b.norm();
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }
  Vector r1 = b, r2 = b, y = b;
  Vector w = Vector::Zero(n), w1, w2 = Vector::Zero(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  Index it = 0;
  for (; it < maxit;) {
    ++it;
    const Vector v = y / beta;
    y = H(v);
    if (it >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = r2.norm();
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    out.x += phi * w;
    if (phibar <= tol * beta1 || beta == 0.0) break;
  }
  out.iterations = it;
  out.residual = (b - H(out.x)).norm() / beta1;
  out.converged = out.residual <= std::max(tol, 10 * eps) * 10;
  return out;
}

// ---------------------------------------------------------------------------
// Extreme eigenpairs

struct ExtremeEigs {
  double lambda1 = 0.0;
  double lambda2 = kInf;  ///< +∞ when n = 1
  Vector v1;
  bool multiplicity_flag = false;
  double residual = 0.0;  ///< ‖A v1 − λ1 v1‖∞
};

inline bool is_multiple(double l1, double l2, const SolverConfig& cfg) {
  return std::isfinite(l2) && l2 - l1 <= cfg.multiplicity_tol * std::max(1.0, std::abs(l1));
}

/// k smallest eigenpairs of the symmetric-definite pencil (A, B); B = I when
/// `B` is null. Eigenvectors are B-orthonormal.
struct SmallestEigs {
  Vector values;
  Matrix vectors;
  double residual = 0.0;
};

inline SmallestEigs smallest_eigs(const SymOp& A, const SymOp* B, Index k, const SolverConfig& cfg) {
  const Index n = A.n();
  detail::require(n >= 1 && k >= 1 && k <= n, "smallest_eigs: need 1 <= k <= n");
  const bool plain = B == nullptr || B->is_identity();
  SmallestEigs out;
  if (n <= cfg.dense_crossover) {
    const Matrix Ad = A.to_dense();
    if (plain) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Ad);
      out.values = es.eigenvalues().head(k);
      out.vectors = es.eigenvectors().leftCols(k);
    } else {
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Ad, B->to_dense());
      out.values = es.eigenvalues().head(k);
      out.vectors = es.eigenvectors().leftCols(k);
    }
  } else {
    krylov::SymmetricOptions opt;
    opt.k = k;
    opt.tol = cfg.eig_tol;
    opt.max_restarts = cfg.max_restarts;
    krylov::SymmetricResult r;
    if (plain) {
      opt.scale = A.norm_estimate();
      r = krylov::lanczos_smallest(n, [&](const Vector& x) { return A.apply(x); }, {}, opt);
    } else {
      detail::require(B->is_solvable(), "smallest_eigs: metric must be diagonal-plus-rank-one");
      // The spectrum of B⁻¹A is bounded by ‖A‖ / λ_min(B); min(d) bounds λ_min(B) from below for σ ≥ 0.
      opt.scale = A.norm_estimate() / std::max(B->drk_sigma() >= 0 ? B->drk_d().minCoeff() : 1.0, 1e-300);
      r = krylov::lanczos_smallest(
          n, [&](const Vector& x) { return B->solve(A.apply(x)); }, [&](const Vector& x) { return B->apply(x); },
          opt);
    }
    if (!r.converged)
      throw ConvergenceError(fmt::format("smallest_eigs: Lanczos did not converge after {} restarts", r.restarts),
                             r.residuals.maxCoeff());
    out.values = r.values;
    out.vectors = r.vectors;
  }
  Vector res = A.apply(out.vectors.col(0)) -
               out.values[0] * (plain ? Vector(out.vectors.col(0)) : B->apply(out.vectors.col(0)));
  out.residual = res.lpNorm<Eigen::Infinity>();
  return out;
}

/// λ₁ ≤ λ₂ and a unit eigenvector for λ₁.
inline ExtremeEigs extreme_eigs(const SymOp& A, const SolverConfig& cfg = {}) {
  const Index n = A.n();
  detail::require(n >= 1, "extreme_eigs: empty operator");
  const SmallestEigs s = smallest_eigs(A, nullptr, std::min<Index>(2, n), cfg);
  ExtremeEigs e;
  e.lambda1 = s.values[0];
  e.lambda2 = n >= 2 ? s.values[1] : kInf;
  e.v1 = s.vectors.col(0).normalized();
  // Deterministic sign: largest-magnitude entry positive.
  Index imax;
  e.v1.cwiseAbs().maxCoeff(&imax);
  if (e.v1[imax] < 0) e.v1 = -e.v1;
  e.multiplicity_flag = is_multiple(e.lambda1, e.lambda2, cfg);
  e.residual = (A.apply(e.v1) - e.lambda1 * e.v1).lpNorm<Eigen::Infinity>();
  return e;
}

}  // namespace etrs
