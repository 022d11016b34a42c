#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace bmf {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;   // complex dense, column-major
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//
// Error kinds. Every failure mode named by the public API maps to one of
// these; messages carry enough context to identify the offending input.
//

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonDiagonalizableError : Error { using Error::Error; };
struct FunctionUndefinedError : Error { using Error::Error; };
struct ZeroStartVectorError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct SingularPencilError : Error { using Error::Error; };
struct PoleHitError : Error { using Error::Error; };
struct DegenerateGeometryError : Error { using Error::Error; };
struct EvaluationFailureError : Error { using Error::Error; };
struct SingularityInsideIntervalError : Error { using Error::Error; };
struct OutOfRegimeError : Error { using Error::Error; };
struct UnsupportedGeometryError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct InvalidArgumentError : Error { using Error::Error; };

//
// Finite-entry validation. Matrices and vectors entering the library
// through public factories must carry no NaN/Inf entries.
//

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

inline bool all_finite(const Vector& v) {
  return v.allFinite();
}

template <typename T>
inline void require_finite(const T& m, const char* what) {
  if (!all_finite(m)) {
    throw InvalidArgumentError(std::string(what) + ": non-finite entries");
  }
}

/**
 * @brief An evaluable univariate map z -> f(z) with an optional derivative.
 *
 * Evaluation is deterministic. When a derivative is present it must match a
 * central finite difference away from singularities (checked by tests).
 */
class ScalarFunction {
public:
  using Fn = std::function<Complex(Complex)>;

  ScalarFunction(std::string name, Fn value)
      : name_(std::move(name)), value_(std::move(value)) {}

  ScalarFunction(std::string name, Fn value, Fn derivative)
      : name_(std::move(name)),
        value_(std::move(value)),
        derivative_(std::move(derivative)) {}

  Complex operator()(Complex z) const { return value_(z); }

  bool has_derivative() const { return derivative_.has_value(); }

  Complex derivative(Complex z) const {
    if (!derivative_) {
      throw InvalidArgumentError("ScalarFunction '" + name_ +
                                 "': derivative not available");
    }
    return (*derivative_)(z);
  }

  const std::string& name() const { return name_; }

  // ---- common instances ----

  static ScalarFunction exponential() {
    return ScalarFunction(
        "exp", [](Complex z) { return std::exp(z); },
        [](Complex z) { return std::exp(z); });
  }

  /// sqrt(-z), principal branch; analytic off [0, inf).
  static ScalarFunction sqrt_neg() {
    return ScalarFunction(
        "sqrt-neg", [](Complex z) { return std::sqrt(-z); },
        [](Complex z) { return -0.5 / std::sqrt(-z); });
  }

  /// phi(z) = (exp(z) - 1)/z, entire; phi(0) = 1.
  static ScalarFunction phi() {
    return ScalarFunction(
        "phi", [](Complex z) { return phi_value(z); },
        [](Complex z) { return phi_derivative(z); });
  }

  static ScalarFunction identity() {
    return ScalarFunction(
        "id", [](Complex z) { return z; },
        [](Complex) { return Complex(1.0); });
  }

  static ScalarFunction power(int n) {
    return ScalarFunction(
        "z^" + std::to_string(n),
        [n](Complex z) { return std::pow(z, n); },
        [n](Complex z) { return double(n) * std::pow(z, n - 1); });
  }

  /// 1/(z + shift)
  static ScalarFunction reciprocal_shift(Complex shift) {
    return ScalarFunction(
        "recip-shift",
        [shift](Complex z) { return Complex(1.0) / (z + shift); },
        [shift](Complex z) {
          Complex d = z + shift;
          return Complex(-1.0) / (d * d);
        });
  }

  static Complex phi_value(Complex z) {
    if (std::abs(z) < 0.5) {
      // series sum z^n/(n+1)!
      Complex acc(1.0), term(1.0);
      for (int n = 1; n <= 24; ++n) {
        term *= z / double(n + 1);
        acc += term;
      }
      return acc;
    }
    return (std::exp(z) - 1.0) / z;
  }

  static Complex phi_derivative(Complex z) {
    if (std::abs(z) < 0.5) {
      // series sum n z^(n-1)/(n+1)!
      Complex acc(0.5), zp(1.0);
      double fact = 2.0;  // (n+1)! running
      for (int n = 2; n <= 24; ++n) {
        zp *= z;
        fact *= double(n + 1);
        acc += double(n) * zp / fact;
      }
      return acc;
    }
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
  }

private:
  std::string name_;
  Fn value_;
  std::optional<Fn> derivative_;
};

//
// Deterministic PRNG. std::random distributions are implementation-defined,
// so experiments and tests draw from this instead.
//

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// uniform in [0, 1)
  double uniform() {
    return double(next() >> 11) * 0x1.0p-53;
  }

  /// uniform in [lo, hi)
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  /// standard normal (Box-Muller)
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  /// complex entry in the unit disk (real and imag uniform in the inscribed square)
  Complex unit_disk() {
    constexpr double s = 0.70710678118654752440;
    return Complex(uniform(-s, s), uniform(-s, s));
  }
};

inline Vector random_unit_disk_vector(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.unit_disk();
  return v;
}

inline Matrix random_unit_disk_matrix(Index rows, Index cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.unit_disk();
  return m;
}

/// seeded standard-normal real vector, normalized to unit 2-norm
inline Vector random_unit_normal_vector(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), 0.0);
  double nv = v.norm();
  if (nv == 0.0) v(0) = 1.0; else v /= nv;
  return v;
}

}  // namespace bmf
