// Dense reference solvers built on a full eigendecomposition A = QΛQᵀ.
//
// Nothing here calls the pencil, Krylov, reduction or driver code: the oracle
// enumerates the secular equation φ(λ) = ‖(A + λI)⁻¹a‖² = δ directly and is the
// ground truth for tests and the `verify` command.
#pragma once

#include "etrs/driver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace etrs {

struct DenseEig {
  Vector lambda;  ///< ascending
  Matrix Q;
  Vector c;       ///< Qᵀa
};

inline DenseEig dense_eig(const Matrix& A, const Vector& a) {
  detail::require(A.rows() == A.cols() && A.rows() == a.size(), "dense_eig: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  return {es.eigenvalues(), es.eigenvectors(), es.eigenvectors().transpose() * a};
}

struct PhiValues {
  double phi = 0.0, dphi = 0.0, ddphi = 0.0;
};

/// φ, φ′, φ″ by direct summation.
inline PhiValues phi(const DenseEig& e, double lambda) {
  PhiValues p;
  for (Index i = 0; i < e.lambda.size(); ++i) {
    if (e.c[i] == 0.0) continue;
    const double d = e.lambda[i] + lambda;
    if (d == 0.0) throw std::domain_error(fmt::format("phi: pole at lambda = {:.17g}", lambda));
    const double c2 = e.c[i] * e.c[i];
    p.phi += c2 / (d * d);
    p.dphi += -2.0 * c2 / (d * d * d);
    p.ddphi += 6.0 * c2 / (d * d * d * d);
  }
  return p;
}

namespace oracle_detail {

inline double scale_of(const DenseEig& e) {
  return std::max(1.0, e.lambda.cwiseAbs().maxCoeff());
}

/// x(λ) = −(A + λI)⁻¹a restricted to the index set `use`.
inline Vector x_of(const DenseEig& e, double lambda, double cluster_tol = -1.0) {
  Vector coef(e.lambda.size());
  for (Index i = 0; i < e.lambda.size(); ++i) {
    const double d = e.lambda[i] + lambda;
    coef[i] = (cluster_tol >= 0.0 && std::abs(d) <= cluster_tol) ? 0.0 : -e.c[i] / d;
  }
  return e.Q * coef;
}

/// Root of a monotone f on [lo, hi] with f(lo), f(hi) of opposite signs:
/// bisection to 1e-13 relative width, then guarded Newton polishing.
template <class F, class DF>
double bracket_root(F f, DF df, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 400 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double xn = x - f(x) / d;
    if (!(xn >= lo - (hi - lo) && xn <= hi + (hi - lo))) break;
    if (std::abs(f(xn)) > std::abs(f(x))) break;
    x = xn;
  }
  return x;
}

}  // namespace oracle_detail

/// Global TRS minimizer from the eigendecomposition. In the hard case with a
/// tie-break vector t, the boundary point minimizing tᵀx is returned.
inline TRSSolution oracle_trs(const DenseEig& e, const Vector& a, double delta, const Vector* tie_break = nullptr) {
  const Index n = e.lambda.size();
  detail::require(a.size() == n && delta > 0.0, "oracle_trs: bad input");
  const Matrix A = e.Q * e.lambda.asDiagonal() * e.Q.transpose();
  TRSSolution s;
  s.lam_min = e.lambda[0];
  const double l1 = e.lambda[0];
  const double sc = oracle_detail::scale_of(e);
  const double anorm = a.norm();

  auto finish = [&] {
    const Vector Ax = A * s.x;
    s.obj = quadratic_value(s.x, Ax, a);
    s.kkt1 = (Ax + s.lambda * s.x + a).lpNorm<Eigen::Infinity>();
    s.kkt2 = s.lambda * (s.x.squaredNorm() - delta);
  };

  if (l1 > 0.0) {
    Vector x0 = oracle_detail::x_of(e, 0.0);
    if (x0.squaredNorm() <= delta) {
      s.x = x0;
      s.lambda = 0.0;
      s.kind = TRSCase::interior;
      finish();
      return s;
    }
  }
  // Eigenvalues clustered at λ₁ and the part of a they see.
  const double ctol = 1e-10 * sc;
  Index m = 1;
  while (m < n && e.lambda[m] - l1 <= ctol) ++m;
  const double c1 = e.c.head(m).norm();

  auto hard_point = [&](double lam) {
    Vector xm = oracle_detail::x_of(e, lam, ctol);  // minimum-norm solution
    const Matrix V = e.Q.leftCols(m);
    Vector v = V.col(0);
    if (tie_break) {
      const Vector z = V.transpose() * (*tie_break);
      if (z.norm() > 0.0) v = -(V * z) / z.norm();
    }
    const double eta = std::sqrt(std::max(0.0, delta - xm.squaredNorm()));
    return Vector(xm + eta * v);
  };

  if (l1 <= 0.0 && c1 <= 1e-10 * std::max(anorm, 1e-300)) {
    const Vector xm = oracle_detail::x_of(e, -l1, ctol);
    if (xm.squaredNorm() <= delta || anorm == 0.0) {
      s.lambda = -l1;
      s.x = hard_point(-l1);
      s.kind = TRSCase::boundary_hard;
      finish();
      return s;
    }
  }
  // Boundary root of φ(λ) = δ on (max(0, −λ₁), ∞), where φ decreases.
  const double base = std::max(0.0, -l1);
  double lo = base + (l1 < 0.0 ? 1e-12 * sc : 0.0);
  auto f = [&](double t) { return phi(e, t).phi - delta; };
  auto df = [&](double t) { return phi(e, t).dphi; };
  if (f(lo) <= 0.0) {
    // Root closer to the pole than resolvable: hard-case construction.
    s.lambda = base;
    s.x = l1 <= 0.0 ? hard_point(base) : oracle_detail::x_of(e, base);
    s.kind = l1 <= 0.0 ? TRSCase::boundary_hard : TRSCase::interior;
    finish();
    return s;
  }
  double hi = base + anorm / std::sqrt(delta) + 1.0;
  while (f(hi) > 0.0) hi = base + 2.0 * (hi - base);
  s.lambda = oracle_detail::bracket_root(f, df, lo, hi);
  s.x = oracle_detail::x_of(e, s.lambda);
  s.kind = TRSCase::boundary_easy;
  finish();
  return s;
}

/// All roots of φ(λ) = δ in the open interval (lo, hi), which must lie between
/// consecutive poles. φ is strictly convex there, so at most two exist.
inline std::vector<double> secular_roots_in(const DenseEig& e, double delta, double lo, double hi) {
  std::vector<double> roots;
  if (!(hi > lo)) return roots;
  const double eps = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  double a = lo + eps, b = hi - eps;
  if (!(b > a)) return roots;
  auto dphi = [&](double t) { return phi(e, t).dphi; };
  auto f = [&](double t) { return phi(e, t).phi - delta; };
  // Minimizer of φ: φ′ increases on the interval.
  double tmin;
  if (dphi(a) >= 0.0) tmin = a;
  else if (dphi(b) <= 0.0) tmin = b;
  else tmin = oracle_detail::bracket_root(dphi, [&](double t) { return phi(e, t).ddphi; }, a, b);
  if (f(tmin) > 0.0) return roots;
  if (f(a) > 0.0) roots.push_back(oracle_detail::bracket_root(f, dphi, a, tmin));
  if (f(b) > 0.0) roots.push_back(oracle_detail::bracket_root(f, dphi, tmin, b));
  return roots;
}

struct OracleLNGM {
  LNGMResult result;
  std::vector<double> roots;               ///< roots of φ = δ in the interval
  double reduced_hessian_min = kInf;       ///< λ_min(Zᵀ(A + λI)Z), Z ⟂ x
};

/// Householder-based orthonormal basis of the orthogonal complement of v.
inline Matrix orthogonal_complement(const Vector& v) {
  const Index n = v.size();
  const Matrix vm = v;
  Eigen::HouseholderQR<Matrix> qr(vm);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - 1);
}

inline OracleLNGM oracle_lngm(const DenseEig& e, const Vector& a, double delta) {
  OracleLNGM out;
  LNGMResult& r = out.result;
  const Index n = e.lambda.size();
  const double l1 = e.lambda[0];
  const double l2 = n >= 2 ? e.lambda[1] : kInf;
  if (l1 >= 0.0) {
    r.status = LNGMStatus::none_convex;
    return out;
  }
  if (std::isfinite(l2) && l2 - l1 <= 1e-8 * std::max(1.0, std::abs(l1))) {
    r.status = LNGMStatus::none_multiplicity;
    return out;
  }
  if (std::abs(e.c[0]) <= 1e-10 * a.norm() || a.norm() == 0.0) {
    r.status = LNGMStatus::none_hard_case;
    return out;
  }
  const double lo = std::max(0.0, -l2);
  const double hi = -l1;
  out.roots = secular_roots_in(e, delta, lo, hi);
  if (out.roots.empty()) {
    r.status = LNGMStatus::none_interval;
    r.detail = "no root of phi = delta in the interval";
    return out;
  }
  const double lam = out.roots.back();
  const PhiValues pv = phi(e, lam);
  r.phi_prime = pv.dphi;
  if (pv.dphi < -1e-10 * delta) {
    r.status = LNGMStatus::none_interval;
    return out;
  }
  r.status = LNGMStatus::found;
  r.lambda = lam;
  r.x = oracle_detail::x_of(e, lam);
  const Matrix A = e.Q * e.lambda.asDiagonal() * e.Q.transpose();
  const Vector Ax = A * r.x;
  r.obj = quadratic_value(r.x, Ax, a);
  r.kkt1 = (Ax + lam * r.x + a).lpNorm<Eigen::Infinity>();
  if (n >= 2) {
    const Matrix Z = orthogonal_complement(r.x);
    Matrix H = A;
    H.diagonal().array() += lam;
    const Matrix R = Z.transpose() * H * Z;
    out.reduced_hessian_min = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (R + R.transpose())).eigenvalues()[0];
  }
  return out;
}

/// Global eTRS minimizer by enumerating the TRS global, LNGM and projected-TRS
/// candidates with dense linear algebra.
inline ETRSSolution oracle_etrs(const ETRSInstance& inst) {
  inst.validate();
  const Index n = inst.n();
  const Matrix A = inst.A.to_dense();
  auto obj = [&](const Vector& x) { return quadratic_value(x, A * x, inst.a); };
  const double bn = inst.b.norm();
  const double edge = std::sqrt(inst.delta) * bn;
  ETRSSolution sol;

  if (inst.beta < -edge - 1e-12 * std::max(1.0, edge))
    throw InfeasibleError(fmt::format("oracle_etrs: infeasible (beta = {:.12g} < {:.12g})", inst.beta, -edge));
  if (std::abs(inst.beta + edge) <= 1e-12 * std::max(1.0, edge)) {
    sol.feasibility = Feasibility::unique_point;
    sol.x = -(std::sqrt(inst.delta) / bn) * inst.b;
    sol.provenance = Provenance::unique_feasible_point;
    sol.linear_active = true;
    sol.obj = obj(sol.x);
    return sol;
  }

  const DenseEig e = dense_eig(A, inst.a);
  const TRSSolution g = oracle_trs(e, inst.a, inst.delta, &inst.b);
  if (inst.beta >= edge) {
    sol.feasibility = Feasibility::redundant_linear;
    sol.x = g.x;
    sol.lambda_ball = g.lambda;
    sol.provenance = Provenance::trs_global;
    sol.obj = obj(sol.x);
    std::tie(sol.kkt1, sol.kkt2) = kkt_residuals(inst, sol);
    return sol;
  }

  struct C {
    Provenance p;
    Vector x;
    double lambda;
  };
  std::vector<C> cs;
  cs.push_back({Provenance::trs_global, g.x, g.lambda});
  const OracleLNGM ol = oracle_lngm(e, inst.a, inst.delta);
  sol.lngm = ol.result;
  sol.lngm_searched = true;
  if (ol.result.found()) cs.push_back({Provenance::lngm, ol.result.x, ol.result.lambda});
  const Vector xhat = (inst.beta / inst.b.squaredNorm()) * inst.b;
  if (n == 1) {
    cs.push_back({Provenance::projected_trs, xhat, 0.0});
  } else {
    const Matrix Z = orthogonal_complement(inst.b);
    const Matrix Ar = Z.transpose() * A * Z;
    const Vector ar = Z.transpose() * (inst.a + A * xhat);
    const DenseEig er = dense_eig(Ar, ar);
    const TRSSolution pr = oracle_trs(er, ar, inst.delta - xhat.squaredNorm());
    cs.push_back({Provenance::projected_trs, xhat + Z * pr.x, pr.lambda});
  }
  double best = kInf;
  for (const auto& c : cs) {
    const bool feas = inst.linear_feasible(c.x) && inst.ball_feasible(c.x);
    const double o = obj(c.x);
    sol.candidates.push_back({c.p, o, feas});
    if (feas && o < best) {
      best = o;
      sol.x = c.x;
      sol.lambda_ball = c.lambda;
      sol.provenance = c.p;
    }
  }
  sol.obj = best;
  sol.linear_active = sol.provenance == Provenance::projected_trs;
  std::tie(sol.kkt1, sol.kkt2) = kkt_residuals(inst, sol);
  return sol;
}

}  // namespace etrs
