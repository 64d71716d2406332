#pragma once

#include "etrs/etrs.hpp"

#include <gtest/gtest.h>

namespace etrs::testing {

inline SymOp diag(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return SymOp::from_dense(Matrix(v.asDiagonal()));
}

inline Vector vec(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return v;
}

inline ETRSInstance make_instance(SymOp A, Vector a, Vector b, double beta, double delta) {
  ETRSInstance inst;
  inst.A = std::move(A);
  inst.a = std::move(a);
  inst.b = std::move(b);
  inst.beta = beta;
  inst.delta = delta;
  return inst;
}

inline Matrix random_symmetric(Index n, SplitMix64& rng) {
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j) M.col(j) = rng.normal_vector(n);
  return 0.5 * (M + M.transpose());
}

inline double rel(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

}  // namespace etrs::testing
