// Common types, error classes and solver configuration for the etrs library.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <fmt/core.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace etrs {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Solves a linear system for a fixed operator: returns x with Op x = rhs.
using LinearSolve = std::function<Vector(const Vector&)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method (eigensolver, CG, MINRES) failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(fmt::format("{} (best residual {:.3e})", what, best_residual)),
        best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// The eTRS instance has an empty feasible set.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity contradicts a property guaranteed by theory (e.g. aᵀy₂ = 0
/// for an LNGM eigenvector), which signals a numerical breakdown upstream.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Malformed instance or solution file.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, long column, const std::string& msg)
      : Error(fmt::format("{}:{}:{}: {}", file, line, column, msg)),
        line_(line),
        column_(column) {}
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  long line_;
  long column_;
};

/// Tolerances and limits shared by the solver modules. Defaults are the library's
/// documented choices; every field is exposed through the CLI.
struct SolverConfig {
  /// Hard-case threshold on ‖y₁‖ of the unit pencil eigenvector.
  double tau = 1e-4;
  /// Relative residual target for the symmetric extreme eigensolver.
  double eig_tol = 1e-12;
  /// Relative residual target for the pencil eigensolver.
  double pencil_tol = 1e-12;
  /// Relative residual target for CG / MINRES solves.
  double cg_tol = 1e-12;
  /// Dimension at or below which dense factorizations replace Krylov methods.
  Index dense_crossover = 300;
  /// λ₂ − λ₁ ≤ multiplicity_tol · max(1, |λ₁|) declares a multiple smallest eigenvalue.
  double multiplicity_tol = 1e-8;
  /// Relative imaginary part below which a pencil eigenvalue is accepted as real.
  double real_tol = 1e-8;
  /// |v₁ᵀa| ≤ hard_tol · ‖a‖ declares the TRS hard case.
  double hard_tol = 1e-10;
  /// |v₁ᵀb| ≤ orth_tol · ‖b‖ declares b orthogonal to the smallest eigenvector.
  double orth_tol = 1e-10;
  /// Relative clustering of generalized eigenvalues forming the hard-case null space.
  double null_cluster_tol = 1e-6;
  /// φ′(λ) ≥ −phi_prime_tol is accepted as the LNGM local-minimum sign test.
  double phi_prime_tol = 1e-10;
  /// Iteration caps.
  Index max_restarts = 400;
  Index cg_max_iterations = 0;  // 0 selects max(1000, 10 n)
};

inline Index cg_iteration_cap(const SolverConfig& cfg, Index n) {
  return cfg.cg_max_iterations > 0 ? cfg.cg_max_iterations : std::max<Index>(1000, 10 * n);
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite())
    throw std::invalid_argument(fmt::format("{} must be finite", name));
}

}  // namespace detail

/// Objective q(x) = xᵀHx + 2 gᵀx given Hx precomputed.
inline double quadratic_value(const Vector& x, const Vector& hx, const Vector& g) {
  return x.dot(hx) + 2.0 * g.dot(x);
}

}  // namespace etrs
