#pragma once

#include <bmf/bmf.hpp>

namespace bmf::test {

inline double rel_error(const Matrix& got, const Matrix& want) {
  double scale = want.norm();
  if (scale == 0.0) return got.norm();
  return (got - want).norm() / scale;
}

inline Matrix hermitian_random(Index n, std::uint64_t seed) {
  Matrix a = random_unit_disk_matrix(n, n, seed);
  return 0.5 * (a + a.adjoint());
}

/// random matrix with spectral radius scaled to `radius`, shifted by `shift`
inline Matrix scaled_random(Index n, std::uint64_t seed, double radius, Complex shift) {
  Matrix a = random_unit_disk_matrix(n, n, seed);
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  double r = es.eigenvalues().cwiseAbs().maxCoeff();
  a *= radius / std::max(r, 1e-30);
  a += shift * Matrix::Identity(n, n);
  return a;
}

inline LinearOperator dense_op(const Matrix& a) { return LinearOperator::dense(a); }

}  // namespace bmf::test
