#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gevrey {

using Rational = mpq_class;

inline Rational rational_pow(const Rational& x, long n) {
  if (n == 0) return Rational(1);
  Rational base = n > 0 ? x : Rational(1) / x;
  long m = n > 0 ? n : -n;
  Rational out(1);
  for (long i = 0; i < m; ++i) out *= base;
  return out;
}

// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite input");
  return Rational(x);
}

inline double to_double(const Rational& r) { return r.get_d(); }

inline std::string to_string(const Rational& r) { return r.get_str(); }

// Complex numbers with exact rational real and imaginary parts.
// The gamma coefficients and transport symbol coefficients live here so that
// no rounding occurs before the module boundary.
struct CRational {
  Rational re{0};
  Rational im{0};

  CRational() = default;
  CRational(Rational r) : re(std::move(r)) {}
  CRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  CRational(long r) : re(r) {}

  static CRational i_unit() { return CRational(Rational(0), Rational(1)); }

  CRational& operator+=(const CRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CRational& operator-=(const CRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend CRational operator+(CRational a, const CRational& b) { return a += b; }
  friend CRational operator-(CRational a, const CRational& b) { return a -= b; }
  friend CRational operator*(const CRational& a, const CRational& b) {
    return CRational(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend CRational operator*(const Rational& s, const CRational& a) {
    return CRational(s * a.re, s * a.im);
  }
  friend CRational operator/(const CRational& a, const CRational& b) {
    Rational n = b.re * b.re + b.im * b.im;
    if (n == 0) throw std::domain_error("CRational: division by zero");
    return CRational((a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n);
  }
  friend bool operator==(const CRational& a, const CRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  bool is_zero() const { return re == 0 && im == 0; }

  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  std::string str() const { return re.get_str() + (sgn(im) >= 0 ? "+" : "") + im.get_str() + "i"; }
};

inline CRational crational_pow(const CRational& x, long n) {
  if (n < 0) {
    CRational p = crational_pow(x, -n);
    return CRational(Rational(1)) / p;
  }
  CRational out{Rational(1)};
  for (long i = 0; i < n; ++i) out = out * x;
  return out;
}

}  // namespace gevrey
