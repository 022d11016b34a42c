#pragma once

#include <optional>
#include <utility>

#include "bmf/linear_operator.hpp"
#include "bmf/types.hpp"

namespace bmf {

/**
 * @brief Arnoldi decomposition A U_k = U_k G_k + g_{k+1,k} u_{k+1} e_k^T.
 *
 * `basis` holds the orthonormal U_k (m x k), `hess` the upper Hessenberg
 * compression G_k = U_k^* A U_k with exact zeros below the subdiagonal. The
 * residual pair (g_{k+1,k}, u_{k+1}) is kept ready for the next extension;
 * on lucky breakdown the vector is absent and |g_{k+1,k}| falls below
 * breakdown_tol * ||A||_est. States are immutable snapshots: extension
 * returns a new state whose leading blocks coincide with the old one.
 */
struct ArnoldiState {
  Matrix basis;                          // m x k, orthonormal columns
  Matrix hess;                           // k x k upper Hessenberg
  Complex residual_scalar{0.0, 0.0};     // g_{k+1,k}
  std::optional<Vector> residual_vector; // u_{k+1}, unit norm
  double start_norm = 0.0;               // ||c||_2
  double op_norm_est = 0.0;              // max ||A u_j||_2 seen so far
  bool broken_down = false;

  Index k() const { return basis.cols(); }
  Index dimension() const { return basis.rows(); }
};

struct ArnoldiOptions {
  double breakdown_tol = 1e-12;  // relative to ||A||_est
};

namespace detail {

// Orthogonalize w against the first k basis columns, twice, accumulating the
// coefficients into column (k-1) of hess rows 0..k-1. Returns ||w|| after.
inline double orthogonalize_twice(const Matrix& basis, Index k, Vector& w,
                                  Matrix& hess, Index col) {
  auto u = basis.leftCols(k);
  Vector h = u.adjoint() * w;
  w.noalias() -= u * h;
  Vector h2 = u.adjoint() * w;
  w.noalias() -= u * h2;
  h += h2;
  hess.block(0, col, k, 1) = h;
  return w.norm();
}

}  // namespace detail

/**
 * @brief One-column Arnoldi state for K_1(A, start).
 *
 * Computes G_1 = u_1^* A u_1 and the residual pair, so the state is ready to
 * extend. A zero start vector raises ZeroStartVectorError; breakdown at the
 * very first step (A-invariant start) is reported through the flag.
 */
inline ArnoldiState arnoldi_init(const LinearOperator& op, const Vector& start,
                                 const ArnoldiOptions& opts = {}) {
  if (start.size() != op.dimension()) {
    throw ShapeMismatchError("arnoldi_init: start vector dimension mismatch");
  }
  require_finite(start, "arnoldi_init");
  double nrm = start.norm();
  if (nrm == 0.0) throw ZeroStartVectorError("arnoldi_init: zero start vector");

  ArnoldiState s;
  s.start_norm = nrm;
  s.basis = start / nrm;
  s.hess = Matrix::Zero(1, 1);

  Vector w = op.apply(s.basis.col(0));
  s.op_norm_est = std::max(w.norm(), 1e-300);
  double g = detail::orthogonalize_twice(s.basis, 1, w, s.hess, 0);
  s.residual_scalar = Complex(g, 0.0);
  if (g <= opts.breakdown_tol * s.op_norm_est) {
    s.broken_down = true;
  } else {
    s.residual_vector = w / g;
  }
  return s;
}

/**
 * @brief Extend a state by `steps` Arnoldi steps (full reorthogonalization).
 *
 * The existing leading blocks of basis and hess are unchanged. Lucky
 * breakdown stops the extension early and is reported through broken_down,
 * not as a failure; the returned state then spans an A-invariant subspace.
 */
inline ArnoldiState arnoldi_extend(const LinearOperator& op, const ArnoldiState& state,
                                   Index steps, const ArnoldiOptions& opts = {}) {
  if (state.broken_down) {
    throw InvalidArgumentError("arnoldi_extend: state already broken down");
  }
  if (steps < 0 || state.k() + steps > op.dimension()) {
    throw InvalidArgumentError("arnoldi_extend: k + steps exceeds dimension");
  }
  if (steps == 0) return state;

  const Index k0 = state.k();
  const Index kt = k0 + steps;

  ArnoldiState s;
  s.start_norm = state.start_norm;
  s.op_norm_est = state.op_norm_est;
  s.basis = Matrix(state.dimension(), kt);
  s.basis.leftCols(k0) = state.basis;
  s.hess = Matrix::Zero(kt, kt);
  s.hess.topLeftCorner(k0, k0) = state.hess;

  Complex g = state.residual_scalar;
  Vector u_next = *state.residual_vector;

  Index j = k0;
  for (; j < kt; ++j) {
    // promote the residual pair to column j
    s.basis.col(j) = u_next;
    s.hess(j, j - 1) = g;

    Vector w = op.apply(s.basis.col(j));
    s.op_norm_est = std::max(s.op_norm_est, w.norm());
    double gn = detail::orthogonalize_twice(s.basis, j + 1, w, s.hess, j);
    g = Complex(gn, 0.0);
    if (gn <= opts.breakdown_tol * s.op_norm_est) {
      s.broken_down = true;
      ++j;
      break;
    }
    u_next = w / gn;
  }

  if (j < kt) {  // breakdown: shrink to the j columns actually built
    s.basis.conservativeResize(Eigen::NoChange, j);
    Matrix h = s.hess.topLeftCorner(j, j);
    s.hess = h;
    s.residual_scalar = g;
    s.residual_vector.reset();
  } else {
    s.residual_scalar = g;
    if (s.broken_down) {
      s.residual_vector.reset();
    } else {
      s.residual_vector = u_next;
    }
  }
  return s;
}

}  // namespace bmf
