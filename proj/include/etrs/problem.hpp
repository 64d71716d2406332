// Problem data and result types shared by the driver, the oracle and the CLI.
#pragma once

#include "etrs/operators.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace etrs {

/// minimize xᵀAx + 2aᵀx  subject to  ‖x‖² ≤ δ,  bᵀx ≤ β.
struct ETRSInstance {
  SymOp A = SymOp::identity(0);
  Vector a;
  Vector b;
  double beta = 0.0;
  double delta = 1.0;

  Index n() const { return A.n(); }

  void validate() const {
    detail::require(A.n() >= 1, "ETRSInstance: empty problem");
    detail::require(a.size() == A.n(), fmt::format("ETRSInstance: a has length {}, A has dimension {}", a.size(), A.n()));
    detail::require(b.size() == A.n(), fmt::format("ETRSInstance: b has length {}, A has dimension {}", b.size(), A.n()));
    detail::require(delta > 0.0 && std::isfinite(delta), fmt::format("ETRSInstance: delta must be positive (got {})", delta));
    detail::require(std::isfinite(beta), "ETRSInstance: beta must be finite");
    detail::require_finite(a, "ETRSInstance: a");
    detail::require_finite(b, "ETRSInstance: b");
    detail::require(b.squaredNorm() > 0.0, "ETRSInstance: b must be nonzero");
  }

  double objective(const Vector& x) const { return quadratic_value(x, A.apply(x), a); }

  /// bᵀx ≤ β + 1e-9 (|β| + ‖b‖‖x‖).
  bool linear_feasible(const Vector& x) const {
    return b.dot(x) <= beta + 1e-9 * (std::abs(beta) + b.norm() * x.norm());
  }

  bool ball_feasible(const Vector& x) const { return x.squaredNorm() <= delta * (1.0 + 1e-9); }
};

enum class Feasibility { infeasible, unique_point, redundant_linear, strictly_feasible };

enum class Provenance { trs_global, lngm, projected_trs, unique_feasible_point };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::trs_global: return "trs_global";
    case Provenance::lngm: return "lngm";
    case Provenance::projected_trs: return "projected_trs";
    case Provenance::unique_feasible_point: return "unique_feasible_point";
  }
  return "?";
}

inline std::string_view to_string(Feasibility f) {
  switch (f) {
    case Feasibility::infeasible: return "infeasible";
    case Feasibility::unique_point: return "unique_point";
    case Feasibility::redundant_linear: return "redundant_linear";
    case Feasibility::strictly_feasible: return "strictly_feasible";
  }
  return "?";
}

}  // namespace etrs
