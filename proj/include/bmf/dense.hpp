#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "bmf/types.hpp"

namespace bmf {

/**
 * @brief Eigendecomposition M = P diag(eigvals) P^{-1} with a conditioning
 *        estimate for P.
 *
 * Eigenvalues are sorted lexicographically on (real, imag) so downstream
 * results are deterministic. `unitary` marks the Hermitian fast path, where
 * P^{-1} = P^* exactly.
 */
struct SpectralDecomposition {
  Matrix eigvecs;
  Vector eigvals;
  double cond_estimate = 0.0;
  bool unitary = false;
};

struct EigOptions {
  double cond_cap = 1e12;
  double tol_spectral = 1e-10;  // relative residual cap for ||MP - P Lambda||_F
};

namespace detail {

inline void sort_eigenpairs(Vector& vals, Matrix& vecs) {
  const Index n = vals.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (vals(a).real() != vals(b).real()) return vals(a).real() < vals(b).real();
    return vals(a).imag() < vals(b).imag();
  });
  Vector sv(n);
  Matrix sm(vecs.rows(), n);
  for (Index j = 0; j < n; ++j) {
    sv(j) = vals(order[static_cast<std::size_t>(j)]);
    sm.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
  }
  vals.swap(sv);
  vecs.swap(sm);
}

inline bool hermitian_within(const Matrix& m, double rel_tol) {
  double scale = m.norm();
  if (scale == 0.0) return true;
  return (m - m.adjoint()).norm() <= rel_tol * scale;
}

// One diagonalization attempt; returns false if the solver failed or the
// residual/conditioning contract is not met.
inline bool try_eig(const Matrix& m, const EigOptions& opts, SpectralDecomposition& out) {
  const Index n = m.rows();
  if (hermitian_within(m, 1e-13)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(((m + m.adjoint()) * 0.5).eval());
    if (es.info() != Eigen::Success) return false;
    out.eigvecs = es.eigenvectors();
    out.eigvals = es.eigenvalues().cast<Complex>();
    out.cond_estimate = 1.0;
    out.unitary = true;
    detail::sort_eigenpairs(out.eigvals, out.eigvecs);
    return true;
  }

  Eigen::ComplexEigenSolver<Matrix> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) return false;
  out.eigvecs = es.eigenvectors();
  out.eigvals = es.eigenvalues();
  out.unitary = false;
  detail::sort_eigenpairs(out.eigvals, out.eigvecs);

  Eigen::PartialPivLU<Matrix> lu(out.eigvecs);
  Matrix inv = lu.solve(Matrix::Identity(n, n));
  double cond = out.eigvecs.norm() * inv.norm();
  if (!std::isfinite(cond) || cond > opts.cond_cap) return false;
  out.cond_estimate = cond;

  double scale = m.norm();
  double resid = (m * out.eigvecs - out.eigvecs * out.eigvals.asDiagonal().toDenseMatrix()).norm();
  if (scale > 0.0 && resid > opts.tol_spectral * scale) return false;
  return true;
}

}  // namespace detail

/**
 * @brief Eigendecomposition with deterministic ordering.
 *
 * If the conditioning cap is exceeded, a seeded random diagonal perturbation
 * of size 1e-13 * ||M||_F is applied once and the decomposition retried; a
 * second failure raises NonDiagonalizableError. Hermitian inputs take a
 * unitary fast path.
 */
inline SpectralDecomposition eig(const Matrix& m, const EigOptions& opts = {}) {
  if (m.rows() != m.cols()) {
    throw ShapeMismatchError("eig: matrix must be square");
  }
  require_finite(m, "eig");
  SpectralDecomposition sd;
  if (detail::try_eig(m, opts, sd)) return sd;

  // perturb once and retry
  const Index n = m.rows();
  SplitMix64 rng(0x5eed0eeful);
  Matrix mp = m;
  double eps = 1e-13 * std::max(m.norm(), 1e-300);
  for (Index i = 0; i < n; ++i) {
    mp(i, i) += eps * Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }
  if (detail::try_eig(mp, opts, sd)) return sd;
  throw NonDiagonalizableError(
      "eig: eigenvector condition estimate exceeds cap even after perturbation");
}

/// Frobenius norm; zero iff the matrix is zero.
inline double frobenius_norm(const Matrix& m) {
  return m.norm();
}

namespace detail {

/// P diag(vals) P^{-1}; uses P^* when the decomposition is unitary.
inline Matrix similarity_from_diag(const SpectralDecomposition& sd, const Vector& vals) {
  Matrix w = sd.eigvecs * vals.asDiagonal();
  if (sd.unitary) return w * sd.eigvecs.adjoint();
  // X = W P^{-1}  <=>  P^T X^T = W^T
  Eigen::PartialPivLU<Matrix> lu(sd.eigvecs.transpose().eval());
  return lu.solve(w.transpose()).transpose();
}

}  // namespace detail

/**
 * @brief f(M) = P diag(f(lambda_i)) P^{-1} through the eigendecomposition.
 *
 * Raises FunctionUndefinedError when f is not finite at an eigenvalue and
 * propagates NonDiagonalizableError from eig.
 */
inline Matrix matrix_function(const ScalarFunction& f, const Matrix& m,
                              const EigOptions& opts = {}) {
  SpectralDecomposition sd = eig(m, opts);
  Vector fv(sd.eigvals.size());
  for (Index i = 0; i < sd.eigvals.size(); ++i) {
    Complex v = f(sd.eigvals(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw FunctionUndefinedError("matrix_function: '" + f.name() +
                                   "' undefined at an eigenvalue");
    }
    fv(i) = v;
  }
  return detail::similarity_from_diag(sd, fv);
}

}  // namespace bmf
