#include <doctest.h>

#include <bmf/bmf.hpp>

#include "support/test_utils.hpp"

using namespace bmf;

TEST_CASE("numerical_range_interval: spot values") {
  {
    RealVector lam(6);
    lam << -100.0, -0.1, -40.0, -77.0, -3.5, -12.0;
    Matrix a = lam.cast<Complex>().asDiagonal();
    auto iv = numerical_range_interval(a);
    CHECK(iv.lo == doctest::Approx(-100.0));
    CHECK(iv.hi == doctest::Approx(-0.1));
  }
  {
    auto iv = numerical_range_interval(Matrix::Identity(4, 4));
    CHECK(iv.lo == doctest::Approx(1.0));
    CHECK(iv.hi == doctest::Approx(1.0));
  }
  {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    auto iv = numerical_range_interval(a);
    CHECK(iv.lo == doctest::Approx(-1.0));
    CHECK(iv.hi == doctest::Approx(1.0));
  }
}

TEST_CASE("m_constant: the three cases") {
  constexpr double cp = 2.414213562373095;
  BoundParams p;
  p.normal_a = p.normal_b = true;
  CHECK(m_constant(p) == 1.0);

  p.normal_b = false;
  p.distance_b = 1.0;
  p.boundary_length_b = 100.0;
  CHECK(m_constant(p) == doctest::Approx(cp));

  p.normal_a = false;
  p.boundary_length_a = 2.0 * 3.141592653589793238462643383279502884;
  p.distance_a = 1.0;
  p.boundary_length_b = 1e6;  // B side worse
  CHECK(m_constant(p) == doctest::Approx(cp));

  BoundParams bad;
  CHECK_THROWS_AS(m_constant(bad), DegenerateGeometryError);
}

TEST_CASE("chebyshev_min_error: exact reproduction, spot window, decay") {
  // polynomials of matching degree are reproduced exactly
  ScalarFunction lin("lin", [](Complex z) { return 2.0 * z + 1.0; });
  CHECK(chebyshev_min_error(lin, SpectralInterval(-1.0, 1.0), 1) <= 1e-14);
  CHECK(chebyshev_min_error(lin, SpectralInterval(-1.0, 1.0), 3) <= 1e-14);

  // degree-0 proxy for exp on [-1,1] lands in the documented window
  double v0 = chebyshev_min_error(ScalarFunction::exponential(), SpectralInterval(-1.0, 1.0), 0);
  CHECK(v0 >= 1.17);
  CHECK(v0 <= 1.31);

  // 1/z on [2,4]: small at degree 5 and decaying geometrically
  ScalarFunction recip("recip", [](Complex z) { return 1.0 / z; });
  SpectralInterval iv(2.0, 4.0);
  double prev = chebyshev_min_error(recip, iv, 5);
  CHECK(prev <= 1e-3);
  for (Index d = 6; d <= 10; ++d) {
    double cur = chebyshev_min_error(recip, iv, d);
    CHECK(cur <= 0.35 * prev);  // true ratio is 1/(3+2 sqrt(2)) ~ 0.17
    prev = cur;
  }

  // endpoint singularity is hit by the measurement grid
  CHECK_THROWS_AS(chebyshev_min_error(recip, SpectralInterval(0.0, 2.0), 4),
                  EvaluationFailureError);
}

TEST_CASE("bernstein_rate: spot values and errors") {
  CHECK(bernstein_rate(SpectralInterval(-1.0, 1.0), Complex(2.0)) ==
        doctest::Approx(2.0 + std::sqrt(3.0)));
  // Minkowski-doubled spectrum of the Gramian example, singularity at 0
  double rho = bernstein_rate(SpectralInterval(-200.0, -0.2), Complex(0.0));
  double xi = 200.2 / 199.8;
  CHECK(rho == doctest::Approx(xi + std::sqrt(xi * xi - 1.0)));
  CHECK(rho == doctest::Approx(1.0653).epsilon(1e-3));
  CHECK_THROWS_AS(bernstein_rate(SpectralInterval(-1.0, 1.0), Complex(0.0)),
                  SingularityInsideIntervalError);
}

TEST_CASE("phi_bound: spot values, regimes, continuity") {
  // rho = 9, k = 6: 40 * 81/216 * exp(-36/45)
  CHECK(phi_bound(6, 9.0) == doctest::Approx(15.0 * std::exp(-0.8)).epsilon(1e-12));
  // rho = 10, k = 40: (8/70) (10 e / 60)^40
  double want = 8.0 / 70.0 * std::exp(40.0 * (1.0 + std::log(10.0 / 60.0)));
  CHECK(phi_bound(40, 10.0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(2.0e-15).epsilon(0.05));
  CHECK_THROWS_AS(phi_bound(5, 10.0), OutOfRegimeError);

  for (double rho : {5.0, 10.0, 50.0}) {
    Index k = Index(2.0 * rho);
    double lo = 40.0 * rho * rho / double(k * k * k) * std::exp(-double(k) * double(k) / (5.0 * rho));
    double hi = 8.0 / (3.0 * double(k) - 5.0 * rho) *
                std::exp(double(k) * (1.0 + std::log(rho / (double(k) + 2.0 * rho))));
    double v = phi_bound(k, rho);
    CHECK(v == doctest::Approx(std::min(lo, hi)).epsilon(1e-12));
    CHECK(v > 0.0);
    CHECK(std::max(lo, hi) / std::min(lo, hi) < 10.0);  // regime continuity
  }
}

TEST_CASE("phi_optimal_radius: spot values and proof identity") {
  CHECK(phi_optimal_radius(20, 10.0) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(phi_optimal_radius(40, 10.0) == doctest::Approx(2.0 + std::sqrt(5.0)).epsilon(1e-14));
  CHECK(phi_optimal_radius(1, 100000000.0) == doctest::Approx(1.0).epsilon(1e-7));
  for (auto [k, rho] : {std::pair<Index, double>{7, 3.0}, {33, 11.5}, {120, 41.0}}) {
    double r = phi_optimal_radius(k, rho);
    double t = double(k) / (2.0 * rho);
    CHECK(std::abs(1.0 / r - (std::sqrt(t * t + 1.0) - t)) <= 1e-14);
    CHECK(r > 1.0);
  }
}

TEST_CASE("exp_bound_reference: spot values and regimes") {
  CHECK(exp_bound_reference(20, 10.0) == doctest::Approx(10.0 * std::exp(-8.0)).epsilon(1e-12));
  double want = 10.0 / 40.0 * std::exp(-10.0) * std::exp(40.0 * (1.0 + std::log(10.0 / 40.0)));
  CHECK(exp_bound_reference(40, 10.0) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(exp_bound_reference(4, 10.0), OutOfRegimeError);
}

TEST_CASE("phi_bound undercuts the exponential reference for large k") {
  for (double rho : {5.0, 10.0, 50.0}) {
    for (double mult : {3.0, 4.0}) {
      Index k = Index(mult * std::ceil(rho));
      CHECK(phi_bound(k, rho) < exp_bound_reference(k, rho));
    }
  }
}

TEST_CASE("phi_bound dominates the measured interpolant error (double-precision range)") {
  ScalarFunction phi = ScalarFunction::phi();
  auto cases = {std::pair<double, Index>{5.0, 5},  {5.0, 8},  {5.0, 10},
                std::pair<double, Index>{5.0, 15}, {5.0, 20}, {10.0, 7},
                std::pair<double, Index>{10.0, 15}, {10.0, 20}, {10.0, 30}};
  for (auto [rho, k] : cases) {
    double measured = chebyshev_min_error(phi, SpectralInterval(-4.0 * rho, 0.0), k - 1);
    CHECK(measured <= phi_bound(k, rho));
  }
}

TEST_CASE("theorem_bound: polynomial exactness and variant support") {
  SpectralInterval e(0.1, 100.0);
  auto p11 = BivariateFunctionSpec::Polynomial(random_unit_disk_matrix(2, 2, 5).eval());
  CHECK(theorem_bound(p11, e, e, 2, 1.0, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(theorem_bound(p11, e, e, 1, 1.0, 1.0, 1.0), UnsupportedGeometryError);
  CHECK_THROWS_AS(theorem_bound(BivariateFunctionSpec::Stein(), e, e, 4, 1.0, 1.0, 1.0),
                  UnsupportedGeometryError);
  CHECK_THROWS_AS(
      theorem_bound(BivariateFunctionSpec::FrequencyLimited(0.0, 1.0), e, e, 4, 1.0, 1.0, 1.0),
      UnsupportedGeometryError);
}

TEST_CASE("theorem_bound: Sylvester decays at the Bernstein rate") {
  SpectralInterval e(0.1, 100.0);
  auto syl = BivariateFunctionSpec::Sylvester();
  double rate = bernstein_rate(SpectralInterval(0.2, 200.0), Complex(0.0));
  // pre-asymptotic decay is slower; the rate settles for k beyond ~150
  std::vector<double> logs;
  for (Index k = 150; k <= 350; k += 25) {
    logs.push_back(std::log(theorem_bound(syl, e, e, k, 1.0, 1.0, 1.0)));
  }
  double n = double(logs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    double x = 150.0 + 25.0 * double(i);
    sx += x; sy += logs[i]; sxx += x * x; sxy += x * logs[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(-slope - std::log(rate)) <= 0.1 * std::log(rate));
}

TEST_CASE("theorem_bound: sum-shift phi bound comparison") {
  SpectralInterval e(-50.0, -0.05);
  auto f = BivariateFunctionSpec::SumShift(ScalarFunction::phi());
  double rho = 25.0;
  // k capped where the double-precision measurement stays above its floor
  for (Index k : {10, 20, 35, 50}) {
    double tb = theorem_bound(f, e, e, k, 1.0, 1.0, 1.0);
    CHECK(tb <= 50.0 * phi_bound(k, rho));
  }
}
