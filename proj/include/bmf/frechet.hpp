#pragma once

#include "bmf/driver.hpp"

namespace bmf {

/**
 * @brief Compressed problem of the Frechet-derivative loop.
 *
 * X_k = F(1:k, k+1:2k) for F = f([[G_k, c~ d~^T], [0, H_k^T]]), i.e.
 * f^[1]{G_k, H_k}(c~ d~^T). Note H_k is generally not G_k^T, so no symmetry
 * is assumed.
 */
inline Matrix frechet_reduced(const ScalarFunction& f, const Matrix& g, const Matrix& h,
                              const Vector& ctilde, const Vector& dtilde,
                              const EigOptions& opts = {}) {
  return divided_difference_block(f, g, h.transpose().eval(),
                                  (ctilde * dtilde.transpose()).eval(), opts);
}

/**
 * @brief Approximate the Frechet derivative action Df{A}(c d^T).
 *
 * Uses the identity Df{A} = f^[1]{A, A^T}: one Krylov space with A and start
 * c, one with A^T and start d, equal depths, and the block-triangular
 * compressed evaluation. Stopping criterion and trace are inherited from the
 * driver.
 */
inline ApproximationResult frechet_apply(const ScalarFunction& f, const LinearOperator& a,
                                         const LinearOperator& a_transpose, const Vector& c,
                                         const Vector& d, const DriverOptions& opts = {}) {
  if (a.dimension() != a_transpose.dimension()) {
    throw ShapeMismatchError("frechet_apply: operator dimensions differ");
  }
  DriverOptions o = opts;
  o.balance = false;  // both Krylov depths stay equal
  return approximate_rank1(BivariateFunctionSpec::DividedDifference(f), a, a_transpose, c, d, o);
}

/**
 * @brief Standard Arnoldi approximation of f(A) c from a k-dimensional
 *        Krylov space: U_k f(G_k) U_k^* c.
 *
 * The comparison baseline for the Frechet runs: both decay at matching rates.
 */
inline Vector univariate_arnoldi(const ScalarFunction& f, const LinearOperator& a,
                                 const Vector& c, Index k, const EigOptions& opts = {}) {
  if (k < 1 || k > a.dimension()) {
    throw InvalidArgumentError("univariate_arnoldi: k out of range");
  }
  ArnoldiState s = arnoldi_init(a, c);
  if (!s.broken_down && k > 1) s = arnoldi_extend(a, s, k - 1);
  Matrix fg = matrix_function(f, s.hess, opts);
  Vector ct = s.basis.adjoint() * c;
  return s.basis * (fg * ct);
}

}  // namespace bmf
