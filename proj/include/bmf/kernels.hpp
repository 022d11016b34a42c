#pragma once

#include <cstring>
#include <utility>
#include <vector>

#include "bmf/dense.hpp"
#include "bmf/types.hpp"

namespace bmf {

inline constexpr double kSigmaSwitch = 1e-6;  // removable-singularity switch
inline constexpr double kPoleTol = 1e-12;     // relative pole detection

/**
 * @brief Tagged description of a bivariate function f(x, y).
 *
 * Variants: Sylvester 1/(alpha+x+y); Stein 1/(1-xy); ReciprocalPolynomial
 * 1/p(x,y); Polynomial p(x,y); TimeLimited (exp(t_e(x+y))-exp(t_s(x+y)))/(x+y);
 * FrequencyLimited -(g(x)+g(y))/(x+y) with the band-limited log kernel g;
 * DividedDifference f^[1](x,y) of a univariate f; SumShift g(x+y).
 *
 * Coefficient grids are rectangular with entry (i, j) multiplying x^i y^j.
 */
class BivariateFunctionSpec {
public:
  enum class Kind {
    sylvester,
    stein,
    reciprocal_polynomial,
    polynomial,
    time_limited,
    frequency_limited,
    divided_difference,
    sum_shift,
  };

  static BivariateFunctionSpec Sylvester(Complex alpha = Complex(0.0)) {
    BivariateFunctionSpec s(Kind::sylvester);
    s.alpha_ = alpha;
    return s;
  }

  static BivariateFunctionSpec Stein() { return BivariateFunctionSpec(Kind::stein); }

  static BivariateFunctionSpec ReciprocalPolynomial(Matrix coeffs) {
    BivariateFunctionSpec s(Kind::reciprocal_polynomial);
    s.set_coeffs(std::move(coeffs));
    return s;
  }

  static BivariateFunctionSpec Polynomial(Matrix coeffs) {
    BivariateFunctionSpec s(Kind::polynomial);
    s.set_coeffs(std::move(coeffs));
    return s;
  }

  static BivariateFunctionSpec TimeLimited(double t_start, double t_end) {
    if (!(t_start >= 0.0) || !(t_start < t_end)) {
      throw InvalidArgumentError("TimeLimited: need 0 <= t_s < t_e <= inf");
    }
    BivariateFunctionSpec s(Kind::time_limited);
    s.t_start_ = t_start;
    s.t_end_ = t_end;
    return s;
  }

  static BivariateFunctionSpec FrequencyLimited(double omega1, double omega2) {
    if (!(omega1 >= 0.0) || !(omega1 < omega2)) {
      throw InvalidArgumentError("FrequencyLimited: need 0 <= w1 < w2 <= inf");
    }
    BivariateFunctionSpec s(Kind::frequency_limited);
    s.omega1_ = omega1;
    s.omega2_ = omega2;
    return s;
  }

  static BivariateFunctionSpec DividedDifference(ScalarFunction f) {
    if (!f.has_derivative()) {
      throw InvalidArgumentError("DividedDifference: scalar function needs a derivative");
    }
    BivariateFunctionSpec s(Kind::divided_difference);
    s.fn_ = std::move(f);
    return s;
  }

  static BivariateFunctionSpec SumShift(ScalarFunction g) {
    BivariateFunctionSpec s(Kind::sum_shift);
    s.fn_ = std::move(g);
    return s;
  }

  Kind kind() const { return kind_; }
  Complex alpha() const { return alpha_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double omega1() const { return omega1_; }
  double omega2() const { return omega2_; }
  const Matrix& coefficients() const { return coeffs_; }
  const ScalarFunction& fn() const { return *fn_; }

private:
  explicit BivariateFunctionSpec(Kind k) : kind_(k) {}

  void set_coeffs(Matrix c) {
    if (c.size() == 0) throw InvalidArgumentError("coefficient grid is empty");
    require_finite(c, "coefficient grid");
    coeffs_ = std::move(c);
  }

  Kind kind_;
  Complex alpha_{0.0};
  double t_start_ = 0.0, t_end_ = 0.0;
  double omega1_ = 0.0, omega2_ = 0.0;
  Matrix coeffs_;
  std::optional<ScalarFunction> fn_;
};

namespace detail {

inline Complex horner_bivariate(const Matrix& p, Complex x, Complex y) {
  Complex acc(0.0);
  for (Index i = p.rows() - 1; i >= 0; --i) {
    Complex row(0.0);
    for (Index j = p.cols() - 1; j >= 0; --j) row = row * y + p(i, j);
    acc = acc * x + row;
  }
  return acc;
}

inline double poly_magnitude_scale(const Matrix& p, Complex x, Complex y) {
  double ax = std::abs(x), ay = std::abs(y), acc = 0.0;
  double xi = 1.0;
  for (Index i = 0; i < p.rows(); ++i) {
    double yj = 1.0;
    for (Index j = 0; j < p.cols(); ++j) {
      acc += std::abs(p(i, j)) * xi * yj;
      yj *= ay;
    }
    xi *= ax;
  }
  return acc;
}

inline Complex reciprocal_checked(Complex num, Complex den, double scale, const char* what,
                                  bool singular_pencil = false) {
  if (den == Complex(0.0) || std::abs(den) < kPoleTol * scale) {
    if (singular_pencil) throw SingularPencilError(std::string(what) + ": singular pencil");
    throw PoleHitError(std::string(what) + ": denominator vanishes");
  }
  return num / den;
}

/// complex exp(z) - 1 without cancellation for small |z|
inline Complex expm1_c(Complex z) {
  if (std::abs(z) < 0.5) return z * ScalarFunction::phi_value(z);
  return std::exp(z) - 1.0;
}

}  // namespace detail

/**
 * @brief Pointwise evaluation of a bivariate spec at (x, y).
 *
 * TimeLimited with finite t_e evaluates through phi and is uniformly accurate
 * across the removable singularity x + y = 0 (value t_e - t_s there);
 * DividedDifference switches to f'((x+y)/2) when |x - y| < 1e-6. Rational
 * variants raise PoleHitError near their poles.
 */
inline Complex eval_scalar(const BivariateFunctionSpec& f, Complex x, Complex y) {
  using Kind = BivariateFunctionSpec::Kind;
  switch (f.kind()) {
    case Kind::sylvester: {
      Complex den = f.alpha() + x + y;
      double scale = std::abs(f.alpha()) + std::abs(x) + std::abs(y);
      return detail::reciprocal_checked(Complex(1.0), den, scale, "Sylvester");
    }
    case Kind::stein: {
      Complex den = Complex(1.0) - x * y;
      double scale = 1.0 + std::abs(x) * std::abs(y);
      return detail::reciprocal_checked(Complex(1.0), den, scale, "Stein");
    }
    case Kind::reciprocal_polynomial: {
      Complex den = detail::horner_bivariate(f.coefficients(), x, y);
      double scale = detail::poly_magnitude_scale(f.coefficients(), x, y);
      return detail::reciprocal_checked(Complex(1.0), den, scale, "ReciprocalPolynomial");
    }
    case Kind::polynomial:
      return detail::horner_bivariate(f.coefficients(), x, y);
    case Kind::time_limited: {
      Complex z = x + y;
      double ts = f.t_start(), te = f.t_end();
      if (te == kInf) {
        if (z.real() >= 0.0) {
          throw FunctionUndefinedError("TimeLimited(t_e=inf): needs Re(x+y) < 0");
        }
        double scale = std::abs(x) + std::abs(y);
        return -std::exp(ts * z) *
               detail::reciprocal_checked(Complex(1.0), z, scale, "TimeLimited(t_e=inf)");
      }
      // (exp(te z) - exp(ts z))/z = exp(ts z) (te - ts) phi((te - ts) z)
      return std::exp(ts * z) * (te - ts) * ScalarFunction::phi_value((te - ts) * z);
    }
    case Kind::frequency_limited: {
      auto g = [&](Complex z) -> double {
        Complex lo = z + Complex(0.0, f.omega1());
        if (lo == Complex(0.0)) {
          throw FunctionUndefinedError("FrequencyLimited: z = -i w1");
        }
        constexpr double pi = 3.141592653589793238462643383279502884;
        if (f.omega2() == kInf) return std::arg(lo) / pi - 0.5;
        Complex hi = z + Complex(0.0, f.omega2());
        return -std::arg(hi / lo) / pi;
      };
      Complex den = x + y;
      double scale = std::abs(x) + std::abs(y);
      return detail::reciprocal_checked(Complex(-(g(x) + g(y))), den, scale,
                                        "FrequencyLimited");
    }
    case Kind::divided_difference: {
      const ScalarFunction& fn = f.fn();
      if (std::abs(x - y) < kSigmaSwitch) return fn.derivative(0.5 * (x + y));
      return (fn(x) - fn(y)) / (x - y);
    }
    case Kind::sum_shift:
      return f.fn()(x + y);
  }
  throw Error("eval_scalar: unreachable");
}

namespace detail {

inline bool same_matrix(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.data() == b.data()) return true;
  return std::memcmp(a.data(), b.data(), sizeof(Complex) * std::size_t(a.size())) == 0;
}

// P^{-1} C with the decomposition of the left matrix.
inline Matrix left_inverse_apply(const SpectralDecomposition& sd, const Matrix& c) {
  if (sd.unitary) return sd.eigvecs.adjoint() * c;
  return sd.eigvecs.partialPivLu().solve(c);
}

// C (Q^T)^{-1} = (Q^{-1} C^T)^T with the decomposition of the right matrix.
inline Matrix right_inv_transpose_apply(const Matrix& c, const SpectralDecomposition& sd) {
  if (sd.unitary) return c * sd.eigvecs.conjugate();
  return sd.eigvecs.partialPivLu().solve(c.transpose().eval()).transpose();
}

// C Q^{-1}
inline Matrix right_inverse_apply(const Matrix& c, const SpectralDecomposition& sd) {
  if (sd.unitary) return c * sd.eigvecs.adjoint();
  Matrix qt = sd.eigvecs.transpose();
  return qt.partialPivLu().solve(c.transpose().eval()).transpose();
}

}  // namespace detail

/**
 * @brief Dense verification oracle: f{A,B}(C) by two-sided diagonalization.
 *
 * With P^{-1} A P and Q^{-1} B Q diagonal, returns P (F o C~) Q^T where
 * C~ = P^{-1} C Q^{-T} and F_ij = f(lambda_i, mu_j). Exact up to conditioning;
 * this is the reference every other evaluation path is checked against.
 */
inline Matrix hadamard_eval(const BivariateFunctionSpec& f, const Matrix& a, const Matrix& b,
                            const Matrix& c, const EigOptions& opts = {}) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw ShapeMismatchError("hadamard_eval: A, B must be square");
  }
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw ShapeMismatchError("hadamard_eval: C shape must be (m, n)");
  }
  SpectralDecomposition sa = eig(a, opts);
  SpectralDecomposition sb = detail::same_matrix(a, b) ? sa : eig(b, opts);

  Matrix f_grid(sa.eigvals.size(), sb.eigvals.size());
  for (Index i = 0; i < sa.eigvals.size(); ++i) {
    for (Index j = 0; j < sb.eigvals.size(); ++j) {
      Complex v = eval_scalar(f, sa.eigvals(i), sb.eigvals(j));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw FunctionUndefinedError("hadamard_eval: f not finite at an eigenvalue pair");
      }
      f_grid(i, j) = v;
    }
  }

  Matrix ctilde = detail::right_inv_transpose_apply(detail::left_inverse_apply(sa, c), sb);
  Matrix core = f_grid.cwiseProduct(ctilde);
  return sa.eigvecs * core * sb.eigvecs.transpose();
}

/**
 * @brief p{A,B}(C) = sum_ij p_ij A^i C (B^T)^j by explicit monomial summation.
 *
 * Deliberately independent of any eigendecomposition; cross-checks
 * hadamard_eval and realizes the exactness statements for polynomials.
 */
inline Matrix poly_eval_bivariate(const Matrix& coeffs, const Matrix& a, const Matrix& b,
                                  const Matrix& c) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw ShapeMismatchError("poly_eval_bivariate: A, B must be square");
  }
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw ShapeMismatchError("poly_eval_bivariate: C shape must be (m, n)");
  }
  Matrix bt = b.transpose();
  Matrix acc = Matrix::Zero(c.rows(), c.cols());
  Matrix cj = c;  // C (B^T)^j
  for (Index j = 0; j < coeffs.cols(); ++j) {
    if (j > 0) cj = cj * bt;
    Matrix term = cj;  // A^i C (B^T)^j running in i
    for (Index i = 0; i < coeffs.rows(); ++i) {
      if (i > 0) term = a * term;
      Complex p = coeffs(i, j);
      if (p != Complex(0.0)) acc.noalias() += p * term;
    }
  }
  return acc;
}

/**
 * @brief Solve G X + X H^T + alpha X = C for small dense G, H.
 *
 * Two-sided diagonalization with entrywise division by alpha+lambda_i+mu_j;
 * raises SingularPencilError when some denominator (relatively) vanishes.
 */
inline Matrix sylvester_small(const Matrix& g, const Matrix& h, const Matrix& c,
                              Complex alpha = Complex(0.0), const EigOptions& opts = {}) {
  if (g.rows() != g.cols() || h.rows() != h.cols()) {
    throw ShapeMismatchError("sylvester_small: G, H must be square");
  }
  if (c.rows() != g.rows() || c.cols() != h.rows()) {
    throw ShapeMismatchError("sylvester_small: C shape must be (k, l)");
  }
  SpectralDecomposition sg = eig(g, opts);
  SpectralDecomposition sh = detail::same_matrix(g, h) ? sg : eig(h, opts);

  Matrix ctilde = detail::right_inv_transpose_apply(detail::left_inverse_apply(sg, c), sh);
  Matrix core(ctilde.rows(), ctilde.cols());
  for (Index i = 0; i < core.rows(); ++i) {
    for (Index j = 0; j < core.cols(); ++j) {
      Complex den = alpha + sg.eigvals(i) + sh.eigvals(j);
      double scale = std::abs(alpha) + std::abs(sg.eigvals(i)) + std::abs(sh.eigvals(j));
      core(i, j) =
          detail::reciprocal_checked(ctilde(i, j), den, scale, "sylvester_small", true);
    }
  }
  return sg.eigvecs * core * sh.eigvecs.transpose();
}

/**
 * @brief The (1,2) block of f([[G, C], [0, Hb]]), i.e. f^[1]{G, Hb^T}(C).
 *
 * Evaluated through the two diagonal blocks' own eigendecompositions with
 * stable scalar divided differences (midpoint-derivative rule near the
 * diagonal), which keeps the block identity of the embedding well defined
 * even when G and Hb share eigenvalues and the 2k x 2k matrix itself is
 * defective. Cross-checked in tests against matrix_function on the literal
 * embedding for separated spectra.
 */
inline Matrix divided_difference_block(const ScalarFunction& f, const Matrix& g,
                                       const Matrix& hb, const Matrix& c,
                                       const EigOptions& opts = {}) {
  if (g.rows() != g.cols() || hb.rows() != hb.cols()) {
    throw ShapeMismatchError("divided_difference_block: G, Hb must be square");
  }
  if (c.rows() != g.rows() || c.cols() != hb.rows()) {
    throw ShapeMismatchError("divided_difference_block: C shape must be (k, l)");
  }
  SpectralDecomposition sg = eig(g, opts);
  SpectralDecomposition sh = detail::same_matrix(g, hb) ? sg : eig(hb, opts);

  BivariateFunctionSpec dd = BivariateFunctionSpec::DividedDifference(f);
  Matrix grid(sg.eigvals.size(), sh.eigvals.size());
  for (Index i = 0; i < sg.eigvals.size(); ++i) {
    for (Index j = 0; j < sh.eigvals.size(); ++j) {
      Complex v = eval_scalar(dd, sg.eigvals(i), sh.eigvals(j));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw FunctionUndefinedError("divided_difference_block: f^[1] not finite");
      }
      grid(i, j) = v;
    }
  }

  // X = P_G (DD o (P_G^{-1} C P_H)) P_H^{-1}
  Matrix cprime = detail::left_inverse_apply(sg, c) * sh.eigvecs;
  Matrix core = grid.cwiseProduct(cprime);
  return detail::right_inverse_apply(sg.eigvecs * core, sh);
}

/**
 * @brief The compressed problem X = f{G, H}(c~ d~^T) on Hessenberg pairs.
 *
 * Dispatch is tailored to the function: Sylvester solves the small matrix
 * equation, DividedDifference goes through the block identity, Polynomial
 * through monomial summation, everything else through the Hadamard oracle.
 */
inline Matrix eval_compressed(const BivariateFunctionSpec& f, const Matrix& g, const Matrix& h,
                              const Vector& ctilde, const Vector& dtilde,
                              const EigOptions& opts = {}) {
  using Kind = BivariateFunctionSpec::Kind;
  Matrix c = ctilde * dtilde.transpose();
  switch (f.kind()) {
    case Kind::sylvester:
      return sylvester_small(g, h, c, f.alpha(), opts);
    case Kind::divided_difference:
      return divided_difference_block(f.fn(), g, h.transpose().eval(), c, opts);
    case Kind::polynomial:
      return poly_eval_bivariate(f.coefficients(), g, h, c);
    default:
      return hadamard_eval(f, g, h, c, opts);
  }
}

/**
 * @brief Rank-r right-hand side C = sum_i c_i d_i^T.
 */
struct LowRankRhs {
  Matrix left;   // m x r
  Matrix right;  // n x r

  LowRankRhs(Matrix l, Matrix r) : left(std::move(l)), right(std::move(r)) {
    if (left.cols() != right.cols()) {
      throw ShapeMismatchError("LowRankRhs: factor counts differ");
    }
    if (left.cols() == 0) throw InvalidArgumentError("LowRankRhs: empty factors");
    require_finite(left, "LowRankRhs.left");
    require_finite(right, "LowRankRhs.right");
    for (Index j = 0; j < left.cols(); ++j) {
      if (left.col(j).norm() == 0.0 || right.col(j).norm() == 0.0) {
        throw InvalidArgumentError("LowRankRhs: zero factor column");
      }
    }
  }

  static LowRankRhs rank1(Vector c, Vector d) {
    return LowRankRhs(Matrix(std::move(c)), Matrix(std::move(d)));
  }

  Index rank() const { return left.cols(); }
  Matrix dense() const { return left * right.transpose(); }
};

}  // namespace bmf
