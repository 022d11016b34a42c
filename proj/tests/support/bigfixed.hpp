#pragma once

// Fixed-point high-precision arithmetic for the bound-validation oracle.
// Test-only: the library itself stays in double precision.
//
// Representation: sign * (limbs as a 704-bit unsigned integer) / 2^640,
// i.e. one 64-bit integer limb on top of 640 fractional bits (~192 decimal
// digits of resolution). All magnitudes arising in the oracle stay far below
// 2^63, and the quantities of interest (interpolation errors of phi down to
// ~1e-75) sit comfortably above the 2^-640 ~ 2e-193 resolution.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bmf::test {

class BigFixed {
public:
  static constexpr int kLimbs = 11;
  static constexpr int kFracLimbs = 10;  // 640 fractional bits

  BigFixed() : neg_(false) { mag_.fill(0); }

  static BigFixed from_int(std::int64_t v) {
    BigFixed x;
    x.neg_ = v < 0;
    std::uint64_t m = x.neg_ ? std::uint64_t(-(v + 1)) + 1 : std::uint64_t(v);
    x.mag_[kFracLimbs] = m;
    return x;
  }

  static BigFixed from_double(double v) {
    BigFixed x;
    if (v == 0.0 || !std::isfinite(v)) return x;
    x.neg_ = v < 0.0;
    double av = std::abs(v);
    int e = 0;
    double m = std::frexp(av, &e);  // av = m * 2^e, m in [0.5, 1)
    std::uint64_t mant = std::uint64_t(std::ldexp(m, 62));  // 62 mantissa bits
    // value = mant * 2^(e - 62): place relative to the binary point at 640
    x.mag_[kFracLimbs] = mant;
    x.shift_bits(e - 62);
    return x;
  }

  /// exact p/q for small integers
  static BigFixed from_ratio(std::int64_t p, std::uint64_t q) {
    BigFixed x = from_int(p);
    x.div_small(q);
    return x;
  }

  double to_double() const {
    double acc = 0.0;
    for (int i = kLimbs - 1; i >= 0; --i) {
      acc = acc * 0x1.0p64 + double(mag_[std::size_t(i)]);
    }
    acc = std::ldexp(acc, -64 * kFracLimbs);
    return neg_ ? -acc : acc;
  }

  bool is_zero() const {
    for (auto l : mag_) {
      if (l != 0) return false;
    }
    return true;
  }

  BigFixed operator-() const {
    BigFixed x = *this;
    if (!x.is_zero()) x.neg_ = !x.neg_;
    return x;
  }

  BigFixed abs() const {
    BigFixed x = *this;
    x.neg_ = false;
    return x;
  }

  friend BigFixed operator+(const BigFixed& a, const BigFixed& b) {
    BigFixed r;
    if (a.neg_ == b.neg_) {
      r.mag_ = add_mag(a.mag_, b.mag_);
      r.neg_ = a.neg_;
    } else {
      int c = cmp_mag(a.mag_, b.mag_);
      if (c == 0) return r;
      if (c > 0) {
        r.mag_ = sub_mag(a.mag_, b.mag_);
        r.neg_ = a.neg_;
      } else {
        r.mag_ = sub_mag(b.mag_, a.mag_);
        r.neg_ = b.neg_;
      }
    }
    if (r.is_zero()) r.neg_ = false;
    return r;
  }

  friend BigFixed operator-(const BigFixed& a, const BigFixed& b) { return a + (-b); }

  friend BigFixed operator*(const BigFixed& a, const BigFixed& b) {
    std::array<std::uint64_t, 2 * kLimbs> prod{};
    for (int i = 0; i < kLimbs; ++i) {
      if (a.mag_[std::size_t(i)] == 0) continue;
      unsigned __int128 carry = 0;
      for (int j = 0; j < kLimbs; ++j) {
        unsigned __int128 cur = prod[std::size_t(i + j)];
        cur += (unsigned __int128)a.mag_[std::size_t(i)] * b.mag_[std::size_t(j)];
        cur += carry;
        prod[std::size_t(i + j)] = std::uint64_t(cur);
        carry = cur >> 64;
      }
      prod[std::size_t(i + kLimbs)] += std::uint64_t(carry);
    }
    assert(prod[2 * kLimbs - 1] == 0);  // no overflow for in-range operands
    BigFixed r;
    for (int i = 0; i < kLimbs; ++i) r.mag_[std::size_t(i)] = prod[std::size_t(i + kFracLimbs)];
    r.neg_ = a.neg_ != b.neg_ && !r.is_zero();
    return r;
  }

  void mul_small(std::uint64_t f) {
    unsigned __int128 carry = 0;
    for (auto& l : mag_) {
      unsigned __int128 cur = (unsigned __int128)l * f + carry;
      l = std::uint64_t(cur);
      carry = cur >> 64;
    }
    assert(carry == 0);
    if (is_zero()) neg_ = false;
  }

  void div_small(std::uint64_t d) {
    assert(d != 0);
    unsigned __int128 rem = 0;
    for (int i = kLimbs - 1; i >= 0; --i) {
      unsigned __int128 cur = (rem << 64) | mag_[std::size_t(i)];
      mag_[std::size_t(i)] = std::uint64_t(cur / d);
      rem = cur % d;
    }
    if (is_zero()) neg_ = false;
  }

  /// multiply by 2^-s (s >= 0)
  void shift_down(int s) { shift_bits(-s); }

  friend int compare(const BigFixed& a, const BigFixed& b) {
    if (a.neg_ != b.neg_) return a.neg_ ? -1 : 1;
    int c = cmp_mag(a.mag_, b.mag_);
    return a.neg_ ? -c : c;
  }

  friend bool operator<(const BigFixed& a, const BigFixed& b) { return compare(a, b) < 0; }

  /// Newton reciprocal, seeded from double; valid for |z| in [2^-60, 2^60].
  static BigFixed reciprocal(const BigFixed& z) {
    assert(!z.is_zero());
    BigFixed y = from_double(1.0 / z.to_double());
    BigFixed two = from_int(2);
    for (int it = 0; it < 6; ++it) {
      y = y * (two - z * y);
    }
    return y;
  }

  friend BigFixed operator/(const BigFixed& a, const BigFixed& b) {
    return a * reciprocal(b);
  }

  /// exp(x) for x in [-820, 1]
  static BigFixed exp(const BigFixed& x) {
    int s = 0;
    double ax = std::abs(x.to_double());
    while (std::ldexp(ax, -s) > 0.5) ++s;
    BigFixed xr = x;
    xr.shift_down(s);
    BigFixed e = exp_taylor(xr);
    for (int i = 0; i < s; ++i) e = e * e;
    return e;
  }

  /// phi(z) = (exp(z) - 1)/z, phi(0) = 1
  static BigFixed phi(const BigFixed& z) {
    if (std::abs(z.to_double()) < 0.5) {
      // sum z^n/(n+1)!
      BigFixed acc = from_int(1);
      BigFixed term = from_int(1);
      for (std::uint64_t n = 1; n <= 120; ++n) {
        term = term * z;
        term.div_small(n + 1);
        if (term.is_zero()) break;
        acc = acc + term;
      }
      return acc;
    }
    return (exp(z) - from_int(1)) * reciprocal(z);
  }

  /// cos(t) for |t| <= pi
  static BigFixed cos(const BigFixed& t) {
    BigFixed t2 = t * t;
    BigFixed acc = from_int(1);
    BigFixed term = from_int(1);
    for (std::uint64_t n = 1; n <= 120; ++n) {
      term = term * t2;
      term.div_small(2 * n - 1);
      term.div_small(2 * n);
      if (term.is_zero()) break;
      if (n % 2 == 1) {
        acc = acc - term;
      } else {
        acc = acc + term;
      }
    }
    return acc;
  }

  /// pi by Machin's formula, computed once
  static const BigFixed& pi() {
    static const BigFixed value = [] {
      BigFixed a = arctan_inv(5);
      a.mul_small(16);
      BigFixed b = arctan_inv(239);
      b.mul_small(4);
      return a - b;
    }();
    return value;
  }

private:
  static BigFixed exp_taylor(const BigFixed& x) {  // |x| <= 0.5
    BigFixed acc = from_int(1);
    BigFixed term = from_int(1);
    for (std::uint64_t n = 1; n <= 130; ++n) {
      term = term * x;
      term.div_small(n);
      if (term.is_zero()) break;
      acc = acc + term;
    }
    return acc;
  }

  /// arctan(1/q) for integer q >= 2 (Gregory series)
  static BigFixed arctan_inv(std::uint64_t q) {
    BigFixed pw = from_ratio(1, q);
    BigFixed acc = pw;
    std::uint64_t q2 = q * q;
    for (std::uint64_t n = 1; n <= 600; ++n) {
      pw.div_small(q2);
      if (pw.is_zero()) break;
      BigFixed term = pw;
      term.div_small(2 * n + 1);
      if (n % 2 == 1) {
        acc = acc - term;
      } else {
        acc = acc + term;
      }
    }
    return acc;
  }

  void shift_bits(int s) {
    if (s == 0 || is_zero()) return;
    if (s > 0) {
      int limb = s / 64, bits = s % 64;
      for (int i = kLimbs - 1; i >= 0; --i) {
        std::uint64_t lo = (i - limb) >= 0 ? mag_[std::size_t(i - limb)] : 0;
        std::uint64_t lo2 = (i - limb - 1) >= 0 ? mag_[std::size_t(i - limb - 1)] : 0;
        mag_[std::size_t(i)] = bits == 0 ? lo : (lo << bits) | (lo2 >> (64 - bits));
      }
    } else {
      int t = -s;
      int limb = t / 64, bits = t % 64;
      for (int i = 0; i < kLimbs; ++i) {
        std::uint64_t hi = (i + limb) < kLimbs ? mag_[std::size_t(i + limb)] : 0;
        std::uint64_t hi2 = (i + limb + 1) < kLimbs ? mag_[std::size_t(i + limb + 1)] : 0;
        mag_[std::size_t(i)] = bits == 0 ? hi : (hi >> bits) | (hi2 << (64 - bits));
      }
    }
    if (is_zero()) neg_ = false;
  }

  static std::array<std::uint64_t, kLimbs> add_mag(const std::array<std::uint64_t, kLimbs>& a,
                                                   const std::array<std::uint64_t, kLimbs>& b) {
    std::array<std::uint64_t, kLimbs> r{};
    unsigned __int128 carry = 0;
    for (int i = 0; i < kLimbs; ++i) {
      unsigned __int128 cur = (unsigned __int128)a[std::size_t(i)] + b[std::size_t(i)] + carry;
      r[std::size_t(i)] = std::uint64_t(cur);
      carry = cur >> 64;
    }
    assert(carry == 0);
    return r;
  }

  static std::array<std::uint64_t, kLimbs> sub_mag(const std::array<std::uint64_t, kLimbs>& a,
                                                   const std::array<std::uint64_t, kLimbs>& b) {
    std::array<std::uint64_t, kLimbs> r{};
    std::uint64_t borrow = 0;
    for (int i = 0; i < kLimbs; ++i) {
      std::uint64_t bi = b[std::size_t(i)];
      std::uint64_t ai = a[std::size_t(i)];
      std::uint64_t d = ai - bi - borrow;
      borrow = (ai < bi + borrow) || (bi + borrow < bi) ? 1 : 0;
      r[std::size_t(i)] = d;
    }
    return r;
  }

  static int cmp_mag(const std::array<std::uint64_t, kLimbs>& a,
                     const std::array<std::uint64_t, kLimbs>& b) {
    for (int i = kLimbs - 1; i >= 0; --i) {
      if (a[std::size_t(i)] != b[std::size_t(i)]) {
        return a[std::size_t(i)] < b[std::size_t(i)] ? -1 : 1;
      }
    }
    return 0;
  }

  std::array<std::uint64_t, kLimbs> mag_;
  bool neg_;
};

/**
 * High-precision sup error over a Chebyshev-distributed grid of the
 * degree-(k-1) Chebyshev interpolant to phi on [-4 rho, 0] (integer rho).
 * The independent oracle behind the phi-bound validity check: the true error
 * at large k lies far below double precision.
 */
inline double phi_interpolant_error_hp(int k, int rho, int grid_n = 2001) {
  using BF = BigFixed;
  const BF& pi = BF::pi();
  const BF two = BF::from_int(2);

  // interpolation nodes x_i = cos((2i+1) pi / (2k)) and values phi((2x-2) rho)
  std::vector<BF> nodes(static_cast<std::size_t>(k));
  std::vector<BF> values(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    BF theta = pi;
    theta.mul_small(std::uint64_t(2 * i + 1));
    theta.div_small(std::uint64_t(2 * k));
    nodes[std::size_t(i)] = BF::cos(theta);
    BF t = nodes[std::size_t(i)] * two - two;
    t.mul_small(std::uint64_t(rho));
    values[std::size_t(i)] = BF::phi(t);
  }

  // Chebyshev coefficients c_j = (2/k) sum_i f_i T_j(x_i), c_0 halved
  std::vector<BF> coeffs(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    BF t0 = BF::from_int(1);
    BF t1 = nodes[std::size_t(i)];
    BF two_x = nodes[std::size_t(i)] * two;
    coeffs[0] = coeffs[0] + values[std::size_t(i)];
    if (k > 1) coeffs[1] = coeffs[1] + values[std::size_t(i)] * t1;
    for (int j = 2; j < k; ++j) {
      BF t2 = two_x * t1 - t0;
      coeffs[std::size_t(j)] = coeffs[std::size_t(j)] + values[std::size_t(i)] * t2;
      t0 = t1;
      t1 = t2;
    }
  }
  for (auto& c : coeffs) {
    c.mul_small(2);
    c.div_small(std::uint64_t(k));
  }
  coeffs[0].div_small(2);

  // grid y_g = cos((g + 1/2) pi / N); Clenshaw for p, direct phi for f
  BF best;
  for (int g = 0; g < grid_n; ++g) {
    BF theta = pi;
    theta.mul_small(std::uint64_t(2 * g + 1));
    theta.div_small(std::uint64_t(2 * grid_n));
    BF y = BF::cos(theta);
    BF two_y = y * two;

    BF b1, b2;
    for (int j = k - 1; j >= 1; --j) {
      BF b0 = coeffs[std::size_t(j)] + two_y * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    BF p = coeffs[0] + y * b1 - b2;

    BF t = y * two - two;
    t.mul_small(std::uint64_t(rho));
    BF err = (BF::phi(t) - p).abs();
    if (best < err) best = err;
  }
  return best.to_double();
}

}  // namespace bmf::test
