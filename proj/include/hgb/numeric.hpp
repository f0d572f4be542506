#pragma once

// Arbitrary precision real and complex numbers on top of MPFR (through
// Boost.Multiprecision). Precision is requested in bits; the Boost backend
// stores a process-wide default, set through PrecisionGuard.

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hgb/linalg.hpp"
#include "hgb/rational.hpp"

namespace hgb {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Sets the working precision for newly created Real values and restores
/// the previous value on destruction.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits) : saved_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
  }
  ~PrecisionGuard() { Real::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

inline Real to_real(const Rat& x) {
  Real num(x.get_num().get_str());
  Real den(x.get_den().get_str());
  return num / den;
}

inline Real real_pi() {
  Real x;
  mpfr_const_pi(x.backend().data(), MPFR_RNDN);
  return x;
}

inline double to_double(const Real& x) { return x.convert_to<double>(); }

struct Complex {
  Real re;
  Real im;

  Complex() : re(0), im(0) {}
  Complex(Real r) : re(std::move(r)), im(0) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(int r) : re(r), im(0) {}

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
  friend Complex operator/(const Complex& a, const Complex& b) {
    Real den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  friend Complex operator/(const Complex& a, const Real& s) { return {a.re / s, a.im / s}; }
  Complex& operator+=(const Complex& b) { return *this = *this + b; }
  Complex& operator-=(const Complex& b) { return *this = *this - b; }
  Complex& operator*=(const Complex& b) { return *this = *this * b; }

  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
};

inline Complex conj(const Complex& z) { return {z.re, -z.im}; }
inline Real norm2(const Complex& z) { return z.re * z.re + z.im * z.im; }
inline Real abs(const Complex& z) { return sqrt(norm2(z)); }
inline Real arg(const Complex& z) { return atan2(z.im, z.re); }

inline Complex cexp(const Complex& z) {
  Real m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

/// exp(2 pi i x) for rational x.
inline Complex unit_root(const Rat& x) {
  Real t = 2 * real_pi() * to_real(frac(x));
  return {cos(t), sin(t)};
}

/// Power r^rho e^{i rho theta} for a point given in polar form, with a
/// complex exponent rho. The branch is fixed by the real value theta.
inline Complex polar_pow(const Real& log_r, const Real& theta, const Complex& rho) {
  return cexp(rho * Complex(log_r, theta));
}

inline std::complex<double> to_std(const Complex& z) { return {to_double(z.re), to_double(z.im)}; }

inline bool is_zero(const Complex& z) { return z.re == 0 && z.im == 0; }
inline Complex zero_like(const Complex&) { return Complex(); }
inline Complex one_like(const Complex&) { return Complex(Real(1)); }
inline double pivot_score(const Complex& z) { return to_double(abs(z)); }

using CMatrix = Matrix<Complex>;

inline Real max_abs(const CMatrix& m) {
  Real best = 0;
  for (const auto& z : m.data()) best = std::max(best, abs(z));
  return best;
}

/// Roots of a polynomial with complex coefficients (ascending order, nonzero
/// leading coefficient) by the Aberth-Ehrlich iteration.
inline std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs) {
  const std::size_t n = coeffs.size() - 1;
  if (n == 0) return {};
  std::vector<Complex> monic(coeffs.size());
  for (std::size_t i = 0; i <= n; ++i) monic[i] = coeffs[i] / coeffs[n];

  auto eval = [&](const Complex& z, Complex& p, Complex& dp) {
    p = monic[n];
    dp = Complex();
    for (std::size_t i = n; i-- > 0;) {
      dp = dp * z + p;
      p = p * z + monic[i];
    }
  };

  Real bound = 0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, abs(monic[i]));
  bound += 1;
  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    Real t = 2 * real_pi() * (Real(k) + Real(0.4)) / Real(static_cast<long>(n));
    Real rad = Real(0.5) * bound;
    z[k] = Complex(rad * cos(t), rad * sin(t));
  }
  const Real tiny = pow(Real(2), -static_cast<long>(Real::default_precision() * 3.3) + 8);
  for (int iter = 0; iter < 2000; ++iter) {
    Real largest = 0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex p, dp;
      eval(z[k], p, dp);
      if (is_zero(p)) continue;
      Complex ratio = p / dp;
      Complex sum;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) sum += Complex(Real(1)) / (z[k] - z[j]);
      Complex step = ratio / (Complex(Real(1)) - ratio * sum);
      z[k] -= step;
      largest = std::max(largest, abs(step) / std::max(Real(1), abs(z[k])));
    }
    if (largest < tiny) break;
  }
  return z;
}

inline std::vector<Complex> eigenvalues(const CMatrix& m) {
  return poly_roots(charpoly(m, Complex()));
}

/// Matches two equally sized lists of complex numbers greedily by distance
/// and returns the largest matched distance.
inline Real multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  Real worst = 0;
  for (const auto& x : a) {
    std::size_t best = 0;
    Real best_d = -1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      Real d = abs(x - b[j]);
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best_d < 0) return Real(1e300);
    worst = std::max(worst, best_d);
    b.erase(b.begin() + static_cast<long>(best));
  }
  return worst;
}

}  // namespace hgb
