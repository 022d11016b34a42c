#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bmf/dense.hpp"
#include "bmf/kernels.hpp"

namespace bmf {

/**
 * @brief Real interval [lo, hi] enclosing a numerical range (Hermitian case).
 */
struct SpectralInterval {
  double lo = 0.0;
  double hi = 0.0;

  SpectralInterval() = default;
  SpectralInterval(double l, double h) : lo(l), hi(h) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw InvalidArgumentError("SpectralInterval: need finite lo <= hi");
    }
  }

  double width() const { return hi - lo; }

  /// Minkowski sum [lo_a + lo_b, hi_a + hi_b]
  SpectralInterval operator+(const SpectralInterval& o) const {
    return SpectralInterval(lo + o.lo, hi + o.hi);
  }
};

/**
 * @brief Inputs for the norm-bound constant M.
 *
 * Boundary lengths and distances describe user-supplied enclosing sets E_A,
 * E_B for the non-normal case; distances must be positive where used.
 */
struct BoundParams {
  bool normal_a = false;
  bool normal_b = false;
  double boundary_length_a = 0.0;
  double boundary_length_b = 0.0;
  double distance_a = 0.0;
  double distance_b = 0.0;
};

/**
 * @brief Interval enclosing W(A) for (near-)Hermitian A.
 *
 * Returns [lambda_min, lambda_max] of the Hermitian part (A + A^*)/2. For
 * hermitian = false this is only the real-axis extent of the bounding
 * rectangle of W(A), a widened-set fallback rather than the field of values.
 */
inline SpectralInterval numerical_range_interval(const Matrix& a, bool hermitian = true) {
  (void)hermitian;
  if (a.rows() != a.cols()) throw ShapeMismatchError("numerical_range_interval: square input");
  require_finite(a, "numerical_range_interval");
  Eigen::SelfAdjointEigenSolver<Matrix> es(((a + a.adjoint()) * 0.5).eval());
  if (es.info() != Eigen::Success) {
    throw EvaluationFailureError("numerical_range_interval: eigensolver failed");
  }
  return SpectralInterval(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
}

/**
 * @brief The norm-bound constant M.
 *
 * (a) both normal: 1; (b) exactly one normal: 1 + sqrt(2) (Crouzeix-Palencia);
 * (c) neither: (1+sqrt(2))/(2 pi) * min over the sides with positive distance
 * of len(boundary)/distance. Case (c) needs at least one positive distance.
 */
inline double m_constant(const BoundParams& p) {
  constexpr double cp = 2.414213562373095048801688724209698;  // 1 + sqrt(2)
  if (p.normal_a && p.normal_b) return 1.0;
  if (p.normal_a || p.normal_b) return cp;
  constexpr double pi = 3.141592653589793238462643383279502884;
  double best = kInf;
  if (p.distance_a > 0.0) best = std::min(best, p.boundary_length_a / p.distance_a);
  if (p.distance_b > 0.0) best = std::min(best, p.boundary_length_b / p.distance_b);
  if (!std::isfinite(best)) {
    throw DegenerateGeometryError("m_constant: case (c) needs a positive boundary distance");
  }
  return cp / (2.0 * pi) * best;
}

namespace detail {

struct ChebInterpolant {
  double mid = 0.0, half = 1.0;
  std::vector<double> coeffs;  // Chebyshev-T coefficients, c[0] already halved

  double operator()(double t) const {
    double x = (t - mid) / half;
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) {
      double b0 = coeffs[j] + 2.0 * x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return coeffs[0] + x * b1 - b2;
  }
};

// Interpolant of degree `degree` at the Chebyshev roots, real-valued g.
inline ChebInterpolant chebyshev_interpolant(const std::function<double(double)>& g,
                                             const SpectralInterval& iv, Index degree) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  const Index n = degree + 1;
  ChebInterpolant p;
  p.mid = 0.5 * (iv.lo + iv.hi);
  p.half = 0.5 * (iv.hi - iv.lo);
  if (p.half == 0.0) p.half = 1.0;

  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double x = std::cos(pi * (2.0 * double(i) + 1.0) / (2.0 * double(n)));
    nodes[std::size_t(i)] = x;
    double v = g(p.mid + p.half * x);
    if (!std::isfinite(v)) {
      throw EvaluationFailureError("chebyshev_min_error: g not finite on the interval");
    }
    vals[std::size_t(i)] = v;
  }

  p.coeffs.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    double t0 = 1.0, t1 = nodes[std::size_t(i)];
    p.coeffs[0] += vals[std::size_t(i)];
    if (n > 1) p.coeffs[1] += vals[std::size_t(i)] * t1;
    for (Index j = 2; j < n; ++j) {
      double t2 = 2.0 * nodes[std::size_t(i)] * t1 - t0;
      p.coeffs[std::size_t(j)] += vals[std::size_t(i)] * t2;
      t0 = t1;
      t1 = t2;
    }
  }
  for (Index j = 0; j < n; ++j) p.coeffs[std::size_t(j)] *= 2.0 / double(n);
  p.coeffs[0] *= 0.5;
  return p;
}

inline double recentred_sup_error(const std::function<double(double)>& g,
                                  const SpectralInterval& iv, const ChebInterpolant& p,
                                  Index grid_points) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  double mid = 0.5 * (iv.lo + iv.hi), half = 0.5 * (iv.hi - iv.lo);
  double emin = kInf, emax = -kInf;
  for (Index i = 0; i < grid_points; ++i) {
    double x = grid_points > 1 ? std::cos(pi * double(i) / double(grid_points - 1)) : 0.0;
    double t = mid + half * x;
    double gv = g(t);
    if (!std::isfinite(gv)) {
      throw EvaluationFailureError("chebyshev_min_error: g not finite on the grid");
    }
    double e = gv - p(t);
    emin = std::min(emin, e);
    emax = std::max(emax, e);
  }
  // centring the error halves the sup for the recentred polynomial
  return 0.5 * (emax - emin);
}

}  // namespace detail

/**
 * @brief Near-best sup-norm approximation error of g by degree-`degree`
 *        polynomials on an interval.
 *
 * Measured on a dense Chebyshev-distributed grid (default 2000 points,
 * doubled once if refinements disagree by more than 1%) as the recentred
 * error of the Chebyshev interpolant. This is the sup error of a concrete
 * polynomial, hence an upper proxy for the true minimum and never the exact
 * infimum (slack bounded by the Lebesgue constant).
 */
inline double chebyshev_min_error(const ScalarFunction& g, const SpectralInterval& iv,
                                  Index degree, Index grid_points = 2000) {
  auto gr = [&](double t) -> double {
    Complex v = g(Complex(t, 0.0));
    return v.real();
  };
  auto p = detail::chebyshev_interpolant(gr, iv, degree);
  double v1 = detail::recentred_sup_error(gr, iv, p, grid_points);
  double v2 = detail::recentred_sup_error(gr, iv, p, 2 * grid_points);
  if (std::abs(v2 - v1) > 0.01 * std::max(v2, 1e-300)) return v2;
  return v1;
}

/**
 * @brief Bernstein-ellipse rate parameter for an interval and a singularity.
 *
 * Maps the interval to [-1,1]; rho = |xi + sqrt(xi^2 - 1)| >= 1 for the image
 * xi of the singularity. Predicts the asymptotic linear convergence rate
 * O(rho^{-k}).
 */
inline double bernstein_rate(const SpectralInterval& iv, Complex singularity) {
  if (!(iv.hi > iv.lo)) {
    throw DegenerateGeometryError("bernstein_rate: interval must have positive width");
  }
  Complex xi = (2.0 * singularity - Complex(iv.lo + iv.hi)) / Complex(iv.hi - iv.lo);
  if (std::abs(xi.imag()) <= 1e-15 * (1.0 + std::abs(xi.real())) &&
      std::abs(xi.real()) <= 1.0 + 1e-15) {
    throw SingularityInsideIntervalError("bernstein_rate: singularity on the interval");
  }
  Complex w = xi + std::sqrt(xi * xi - Complex(1.0));
  double r = std::abs(w);
  return std::max(r, 1.0 / r);
}

/**
 * @brief A-priori error bound 2 M ||c|| ||d|| min_{p in Pi_{k-1}}
 *        sup_{E_A (+) E_B} |g - p| for sum-shift representable functions.
 *
 * Sylvester maps to g(z) = 1/(alpha + z), TimeLimited to its univariate
 * kernel, SumShift to its own g; Polynomial of degree <= (k-1, k-1) gives 0.
 * Everything else (including FrequencyLimited, which is not of the form
 * g(x+y)) raises UnsupportedGeometryError.
 */
inline double theorem_bound(const BivariateFunctionSpec& f, const SpectralInterval& e_a,
                            const SpectralInterval& e_b, Index k, double m_const,
                            double c_norm, double d_norm) {
  using Kind = BivariateFunctionSpec::Kind;
  if (k < 1) throw InvalidArgumentError("theorem_bound: k >= 1 required");
  SpectralInterval sum = e_a + e_b;

  ScalarFunction g = ScalarFunction::identity();
  switch (f.kind()) {
    case Kind::polynomial: {
      if (f.coefficients().rows() <= k && f.coefficients().cols() <= k) return 0.0;
      throw UnsupportedGeometryError("theorem_bound: polynomial degree exceeds (k-1, k-1)");
    }
    case Kind::sylvester: {
      Complex alpha = f.alpha();
      g = ScalarFunction("sylvester-kernel",
                         [alpha](Complex z) { return Complex(1.0) / (alpha + z); });
      break;
    }
    case Kind::time_limited: {
      double ts = f.t_start(), te = f.t_end();
      if (te == kInf) {
        g = ScalarFunction("timelimited-kernel",
                           [ts](Complex z) { return -std::exp(ts * z) / z; });
      } else {
        g = ScalarFunction("timelimited-kernel", [ts, te](Complex z) {
          return std::exp(ts * z) * (te - ts) * ScalarFunction::phi_value((te - ts) * z);
        });
      }
      break;
    }
    case Kind::sum_shift:
      g = f.fn();
      break;
    default:
      throw UnsupportedGeometryError(
          "theorem_bound: function is not sum-shift representable on intervals");
  }
  return 2.0 * m_const * c_norm * d_norm * chebyshev_min_error(g, sum, k - 1);
}

/**
 * @brief Polynomial approximation bound for phi on [-4 rho, 0].
 *
 * eps_k <= 40 rho^2/k^3 exp(-k^2/(5 rho)) for sqrt(4 rho) <= k <= 2 rho and
 * eps_k <= 8/(3k - 5 rho) (e rho/(k + 2 rho))^k for k >= 2 rho; at k = 2 rho
 * both are computed and the minimum returned. k below sqrt(4 rho) raises
 * OutOfRegimeError. Evaluated in log space so large k do not overflow.
 */
inline double phi_bound(Index k, double rho) {
  if (!(rho > 0.0)) throw InvalidArgumentError("phi_bound: rho > 0 required");
  double kd = double(k);
  if (kd < std::sqrt(4.0 * rho)) {
    throw OutOfRegimeError("phi_bound: k below sqrt(4 rho)");
  }
  auto low = [&]() {
    return std::exp(std::log(40.0 * rho * rho) - 3.0 * std::log(kd) - kd * kd / (5.0 * rho));
  };
  auto high = [&]() {
    double log_base = 1.0 + std::log(rho) - std::log(kd + 2.0 * rho);
    return std::exp(std::log(8.0 / (3.0 * kd - 5.0 * rho)) + kd * log_base);
  };
  if (kd < 2.0 * rho) return low();
  if (kd > 2.0 * rho) return high();
  return std::min(low(), high());
}

/**
 * @brief The radius minimizing exp((r + 1/r - 2) rho) r^{-k}:
 *        r = k/(2 rho) + sqrt(k^2/(4 rho^2) + 1) > 1.
 */
inline double phi_optimal_radius(Index k, double rho) {
  if (!(rho > 0.0) || k < 1) {
    throw InvalidArgumentError("phi_optimal_radius: k, rho positive required");
  }
  double t = double(k) / (2.0 * rho);
  return t + std::sqrt(t * t + 1.0);
}

/**
 * @brief Reference bounds for polynomial approximation of exp on [-4 rho, 0].
 *
 * The standard two-regime form (10 exp(-k^2/(5 rho)) for sqrt(4 rho) <= k <=
 * 2 rho; (10/k) exp(-rho) (e rho/k)^k for k >= 2 rho), from the literature on
 * Krylov approximation of the matrix exponential. Included solely for the
 * bound-comparison experiment; these constants are externally sourced.
 */
inline double exp_bound_reference(Index k, double rho) {
  if (!(rho > 0.0)) throw InvalidArgumentError("exp_bound_reference: rho > 0 required");
  double kd = double(k);
  if (kd < std::sqrt(4.0 * rho)) {
    throw OutOfRegimeError("exp_bound_reference: k below sqrt(4 rho)");
  }
  auto low = [&]() { return 10.0 * std::exp(-kd * kd / (5.0 * rho)); };
  auto high = [&]() {
    double log_base = 1.0 + std::log(rho) - std::log(kd);
    return std::exp(std::log(10.0 / kd) - rho + kd * log_base);
  };
  if (kd < 2.0 * rho) return low();
  if (kd > 2.0 * rho) return high();
  return std::min(low(), high());
}

}  // namespace bmf
