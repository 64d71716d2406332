// Restarted Krylov eigensolvers used by the operator and pencil modules.
//
// Both solvers follow Stewart's Krylov–Schur scheme: expand an Arnoldi (or
// Lanczos) decomposition to m vectors, compute the Ritz pairs of the projected
// matrix, keep the wanted Ritz subspace, and continue from the old residual
// vector. Operators are passed as callables so the solvers stay independent
// of any matrix representation.
#pragma once

#include "etrs/common.hpp"
#include "etrs/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

namespace etrs::krylov {

using Apply = std::function<Vector(const Vector&)>;

struct SymmetricResult {
  Vector values;    ///< ascending
  Matrix vectors;   ///< columns B-orthonormal
  Vector residuals; ///< ‖op(v) − θv‖ bound per pair
  Index restarts = 0;
  bool converged = false;
};

struct SymmetricOptions {
  Index k = 2;
  Index subspace = 0;  ///< 0 selects max(2k + 20, 40), capped at n
  double tol = 1e-12;  ///< residual target relative to `scale`
  double scale = 1.0;
  Index max_restarts = 400;
  std::uint64_t seed = 0x5EED;
};

namespace detail {

/// Orthogonalizes w against the first `cols` columns of V in the inner product
/// defined by BV (BV = V when B = I); two classical Gram–Schmidt passes.
inline Vector orthogonalize(const Matrix& V, const Matrix& BV, Index cols, Vector& w) {
  Vector h = BV.leftCols(cols).transpose() * w;
  w.noalias() -= V.leftCols(cols) * h;
  const Vector h2 = BV.leftCols(cols).transpose() * w;
  w.noalias() -= V.leftCols(cols) * h2;
  return h + h2;
}

}  // namespace detail

/// Thick-restart Lanczos for the k algebraically smallest eigenpairs of an
/// operator that is self-adjoint in the inner product ⟨x, y⟩ = xᵀBy.
/// `op` applies the operator (B⁻¹A for a generalized problem) and `bmul`
/// applies B; pass an empty `bmul` for the Euclidean case.
inline SymmetricResult lanczos_smallest(Index n, const Apply& op, const Apply& bmul,
                                        const SymmetricOptions& opt) {
  ::etrs::detail::require(n >= 1 && opt.k >= 1 && opt.k <= n,
                          fmt::format("lanczos_smallest: need 1 <= k <= n (k={}, n={})", opt.k, n));
  const bool euclid = !bmul;
  const Index m = std::min(n, opt.subspace > 0 ? opt.subspace : std::max<Index>(2 * opt.k + 20, 40));
  const Index k = opt.k;

  Matrix V = Matrix::Zero(n, m + 1);
  Matrix BV;
  if (!euclid) BV = Matrix::Zero(n, m + 1);
  Matrix T = Matrix::Zero(m, m);
  SplitMix64 rng(opt.seed);

  auto bnorm = [&](const Vector& x, Vector& bx) {
    bx = euclid ? x : bmul(x);
    return std::sqrt(std::max(0.0, x.dot(bx)));
  };
  auto set_column = [&](Index j, const Vector& x) {
    Vector bx;
    const double nrm = bnorm(x, bx);
    V.col(j) = x / nrm;
    if (!euclid) BV.col(j) = bx / nrm;
  };
  // Fresh random direction orthogonal to the first `cols` basis vectors.
  auto random_direction = [&](Index cols) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      Vector w = rng.normal_vector(n);
      detail::orthogonalize(V, euclid ? V : BV, cols, w);
      Vector bw;
      if (bnorm(w, bw) > 1e-8 * std::sqrt(static_cast<double>(n))) return w;
    }
    return Vector(Vector::Zero(n));
  };

  set_column(0, rng.normal_vector(n));
  Index kept = 0;
  double beta_last = 0.0;
  SymmetricResult res;
  Eigen::SelfAdjointEigenSolver<Matrix> es;

  for (Index restart = 0;; ++restart) {
    Index mm = m;
    for (Index j = kept; j < m; ++j) {
      Vector w = op(V.col(j));
      const Vector h = detail::orthogonalize(V, euclid ? V : BV, j + 1, w);
      for (Index i = 0; i <= j; ++i) T(j, i) = h[i];
      Vector bw;
      const double beta = bnorm(w, bw);
      if (j + 1 == n) {
        beta_last = 0.0;
        mm = j + 1;
        break;
      }
      if (beta <= 1e-13 * std::max(opt.scale, 1e-300)) {
        // Invariant subspace found: continue with a fresh orthogonal direction.
        const Vector r = random_direction(j + 1);
        if (r.squaredNorm() == 0.0) {
          beta_last = 0.0;
          mm = j + 1;
          break;
        }
        set_column(j + 1, r);
        if (j + 1 < m) T(j + 1, j) = 0.0;
        beta_last = 0.0;
        continue;
      }
      V.col(j + 1) = w / beta;
      if (!euclid) BV.col(j + 1) = bw / beta;
      if (j + 1 < m) T(j + 1, j) = beta;
      beta_last = beta;
    }

    es.compute(T.topLeftCorner(mm, mm));
    const Vector& theta = es.eigenvalues();
    const Matrix& S = es.eigenvectors();
    const Index kk = std::min(k, mm);
    Vector resid(kk);
    for (Index i = 0; i < kk; ++i) resid[i] = std::abs(beta_last * S(mm - 1, i));
    const double target = opt.tol * std::max(opt.scale, 1e-300);
    const bool done = resid.maxCoeff() <= target || mm < m || mm == n;

    if (done || restart >= opt.max_restarts) {
      res.values = theta.head(kk);
      res.vectors = V.leftCols(mm) * S.leftCols(kk);
      res.residuals = resid;
      res.restarts = restart;
      res.converged = resid.maxCoeff() <= target || mm == n;
      return res;
    }

    // Keep the smallest p Ritz vectors and restart from the residual direction.
    const Index p = std::min<Index>(m - 1, k + (m - k) / 2);
    const Matrix Sp = S.leftCols(p);
    V.leftCols(p) = V.leftCols(m) * Sp;
    if (!euclid) BV.leftCols(p) = BV.leftCols(m) * Sp;
    V.col(p) = V.col(m);
    if (!euclid) BV.col(p) = BV.col(m);
    T.setZero();
    for (Index i = 0; i < p; ++i) {
      T(i, i) = theta[i];
      T(p, i) = beta_last * Sp(m - 1, i);
    }
    kept = p;
  }
}

struct NonsymmetricResult {
  Eigen::VectorXcd values;   ///< sorted by decreasing modulus
  Eigen::MatrixXcd vectors;  ///< unit-norm Ritz vectors
  Vector residuals;
  Index restarts = 0;
  bool converged = false;
};

struct NonsymmetricOptions {
  Index nev = 6;
  Index subspace = 0;  ///< 0 selects max(2 nev + 10, 30), capped at n
  double tol = 1e-12;  ///< residual target relative to |θ|
  Index max_restarts = 300;
  std::uint64_t seed = 0xA7A7;
};

/// Krylov–Schur iteration for the `nev` eigenvalues of largest modulus of a
/// real, generally nonsymmetric operator. Complex conjugate pairs are kept
/// together across restarts through their real and imaginary Ritz parts.
inline NonsymmetricResult arnoldi_largest(Index n, const Apply& op, const NonsymmetricOptions& opt) {
  ::etrs::detail::require(n >= 1 && opt.nev >= 1, "arnoldi_largest: need n >= 1 and nev >= 1");
  const Index nev = std::min(opt.nev, n);
  const Index m = std::min(n, opt.subspace > 0 ? opt.subspace : std::max<Index>(2 * nev + 10, 30));

  Matrix V = Matrix::Zero(n, m + 1);
  Matrix H = Matrix::Zero(m + 1, m);
  SplitMix64 rng(opt.seed);
  {
    const Vector v0 = rng.normal_vector(n);
    V.col(0) = v0.normalized();
  }
  Index kept = 0;
  NonsymmetricResult res;
  Eigen::EigenSolver<Matrix> es;

  for (Index restart = 0;; ++restart) {
    Index mm = m;
    double hlast = 0.0;
    for (Index j = kept; j < m; ++j) {
      Vector w = op(V.col(j));
      const double wnorm0 = w.norm();
      const Vector h = detail::orthogonalize(V, V, j + 1, w);
      H.col(j).head(j + 1) = h;
      const double beta = w.norm();
      if (j + 1 == n) {
        H(j + 1, j) = 0.0;
        hlast = 0.0;
        mm = j + 1;
        break;
      }
      if (beta <= 1e-13 * std::max(wnorm0, 1e-300)) {
        Vector r = rng.normal_vector(n);
        detail::orthogonalize(V, V, j + 1, r);
        V.col(j + 1) = r.normalized();
        H(j + 1, j) = 0.0;
        hlast = 0.0;
        continue;
      }
      V.col(j + 1) = w / beta;
      H(j + 1, j) = beta;
      hlast = beta;
    }

    const Matrix G = H.topLeftCorner(mm, mm);
    es.compute(G, true);
    const Eigen::VectorXcd theta = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    std::vector<Index> order(mm);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index x, Index y) {
      const double ax = std::abs(theta[x]), ay = std::abs(theta[y]);
      if (ax != ay) return ax > ay;
      if (theta[x].real() != theta[y].real()) return theta[x].real() > theta[y].real();
      return theta[x].imag() > theta[y].imag();
    });

    const Index want = std::min(nev, mm);
    Vector resid(want);
    bool all = true;
    for (Index i = 0; i < want; ++i) {
      const Index c = order[i];
      const double r = hlast * std::abs(Y(mm - 1, c)) / std::max(Y.col(c).norm(), 1e-300);
      resid[i] = r;
      if (r > opt.tol * std::max(std::abs(theta[c]), 1e-300)) all = false;
    }

    if (all || mm < m || mm == n || restart >= opt.max_restarts) {
      res.values.resize(want);
      res.vectors.resize(n, want);
      const Eigen::MatrixXcd Vm = V.leftCols(mm).cast<std::complex<double>>();
      for (Index i = 0; i < want; ++i) {
        res.values[i] = theta[order[i]];
        Eigen::VectorXcd z = Vm * Y.col(order[i]);
        res.vectors.col(i) = z / z.norm();
      }
      res.residuals = resid;
      res.restarts = restart;
      res.converged = all || mm == n;
      return res;
    }

    // Real basis of the wanted Ritz subspace, conjugate pairs kept whole.
    const Index target = std::min<Index>(m - 2, std::max(nev + (m - nev) / 2, nev + 2));
    Matrix basis(mm, 0);
    std::vector<Index> used;
    auto append = [&](const Vector& c) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = c;
    };
    for (Index i = 0; i < mm && basis.cols() < target; ++i) {
      const Index c = order[i];
      if (theta[c].imag() == 0.0) {
        append(Y.col(c).real());
      } else if (theta[c].imag() > 0.0 || std::find(used.begin(), used.end(), c) == used.end()) {
        append(Y.col(c).real());
        append(Y.col(c).imag());
        // Mark the conjugate partner so it is not added twice.
        for (Index t = i + 1; t < mm; ++t) {
          const Index d = order[t];
          if (std::abs(theta[d] - std::conj(theta[c])) <= 1e-12 * std::abs(theta[c])) {
            used.push_back(d);
            break;
          }
        }
        used.push_back(c);
      }
    }
    // Orthonormalize, then block power steps with G while they sharpen invariance
    // (ill-conditioned Ritz vectors near a defective eigenvalue need them).
    Matrix Q = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(mm, basis.cols());
    auto leak = [&](const Matrix& X) {
      const Matrix GX = G * X;
      return (GX - X * (X.transpose() * GX)).norm();
    };
    double err = leak(Q);
    for (int step = 0; step < 2; ++step) {
      const Matrix GQ = G * Q;
      Matrix Qn = Eigen::HouseholderQR<Matrix>(GQ).householderQ() * Matrix::Identity(mm, Q.cols());
      const double e = leak(Qn);
      if (!(e < err)) break;
      Q = std::move(Qn);
      err = e;
    }
    const Index p = Q.cols();
    const Matrix S = Q.transpose() * G * Q;
    const Vector b = H(mm, mm - 1) * Q.row(mm - 1).transpose();
    V.leftCols(p) = V.leftCols(mm) * Q;
    V.col(p) = V.col(mm);
    H.setZero();
    H.topLeftCorner(p, p) = S;
    H.row(p).head(p) = b.transpose();
    kept = p;
  }
}

}  // namespace etrs::krylov
