#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "bmf/types.hpp"

namespace bmf {

/// Compressed sparse row storage for a square complex matrix.
struct SparseCsr {
  Index n = 0;
  std::vector<Index> row_ptr;   // size n+1
  std::vector<Index> col_idx;
  std::vector<Complex> values;

  Vector apply(const Vector& x) const {
    Vector y = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      Complex acc(0.0);
      for (Index p = row_ptr[static_cast<std::size_t>(i)];
           p < row_ptr[static_cast<std::size_t>(i + 1)]; ++p) {
        acc += values[static_cast<std::size_t>(p)] * x(col_idx[static_cast<std::size_t>(p)]);
      }
      y(i) = acc;
    }
    return y;
  }

  Vector apply_transpose(const Vector& x) const {
    Vector y = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      for (Index p = row_ptr[static_cast<std::size_t>(i)];
           p < row_ptr[static_cast<std::size_t>(i + 1)]; ++p) {
        y(col_idx[static_cast<std::size_t>(p)]) += values[static_cast<std::size_t>(p)] * x(i);
      }
    }
    return y;
  }
};

/**
 * @brief Matrix-vector-product view of a square matrix A: w -> A w.
 *
 * Dense, sparse (CSR) and diagonal payloads are shared and immutable, so an
 * operator is cheap to copy and safe to use from several threads. transposed()
 * reinterprets the same payload as A^T without copying.
 */
class LinearOperator {
public:
  enum class Kind { dense, sparse, diagonal };

  static LinearOperator dense(Matrix a) {
    if (a.rows() != a.cols()) throw ShapeMismatchError("LinearOperator::dense: square matrix required");
    require_finite(a, "LinearOperator::dense");
    LinearOperator op;
    op.kind_ = Kind::dense;
    op.n_ = a.rows();
    op.dense_ = std::make_shared<const Matrix>(std::move(a));
    return op;
  }

  static LinearOperator diagonal(Vector d) {
    require_finite(d, "LinearOperator::diagonal");
    LinearOperator op;
    op.kind_ = Kind::diagonal;
    op.n_ = d.size();
    op.diag_ = std::make_shared<const Vector>(std::move(d));
    return op;
  }

  static LinearOperator sparse(SparseCsr a) {
    for (const auto& v : a.values) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InvalidArgumentError("LinearOperator::sparse: non-finite entries");
      }
    }
    LinearOperator op;
    op.kind_ = Kind::sparse;
    op.n_ = a.n;
    op.sparse_ = std::make_shared<const SparseCsr>(std::move(a));
    return op;
  }

  Kind kind() const { return kind_; }
  Index dimension() const { return n_; }

  LinearOperator transposed() const {
    LinearOperator op = *this;
    if (kind_ != Kind::diagonal) op.transposed_ = !transposed_;
    return op;
  }

  Vector apply(const Vector& x) const {
    if (x.size() != n_) throw ShapeMismatchError("LinearOperator::apply: size mismatch");
    switch (kind_) {
      case Kind::dense:
        return transposed_ ? Vector(dense_->transpose() * x) : Vector(*dense_ * x);
      case Kind::diagonal:
        return Vector(diag_->asDiagonal() * x);
      case Kind::sparse:
        return transposed_ ? sparse_->apply_transpose(x) : sparse_->apply(x);
    }
    throw Error("LinearOperator::apply: unreachable");
  }

  /// Apply to each column of a dense block.
  Matrix apply_block(const Matrix& x) const {
    if (kind_ == Kind::dense && !transposed_) return *dense_ * x;
    if (kind_ == Kind::dense) return dense_->transpose() * x;
    if (kind_ == Kind::diagonal) return diag_->asDiagonal() * x;
    Matrix y(n_, x.cols());
    for (Index j = 0; j < x.cols(); ++j) y.col(j) = apply(x.col(j));
    return y;
  }

  /// True when two operators share the same payload and orientation.
  bool same_as(const LinearOperator& other) const {
    return kind_ == other.kind_ && transposed_ == other.transposed_ &&
           dense_ == other.dense_ && diag_ == other.diag_ && sparse_ == other.sparse_;
  }

private:
  Kind kind_ = Kind::dense;
  Index n_ = 0;
  bool transposed_ = false;
  std::shared_ptr<const Matrix> dense_;
  std::shared_ptr<const Vector> diag_;
  std::shared_ptr<const SparseCsr> sparse_;
};

}  // namespace bmf
