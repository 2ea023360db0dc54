#pragma once

// Arbitrary-precision real and complex scalars on top of MPFR.
//
// Every Real carries its own precision. Binary operators produce a result at
// the larger of the two operand precisions; precision is never taken from
// ambient global state.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <compare>
#include <string>
#include <utility>

namespace modpoly {

using Precision = mpfr_prec_t;

class Real {
 public:
  explicit Real(Precision bits = 64);
  Real(long value, Precision bits);
  Real(double value, Precision bits);
  Real(const mpz_class& value, Precision bits);
  Real(const mpq_class& value, Precision bits);
  /// Parses a decimal literal such as "9.5387" or "-1e-30", rounded to nearest.
  static Real from_string(const std::string& literal, Precision bits);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  /// Copy of this value rounded to `bits` of precision.
  Real with_precision(Precision bits) const;

  Precision precision() const { return mpfr_get_prec(value_); }
  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  /// Scientific notation with `digits` significant digits.
  std::string to_string(int digits = 20) const;
  /// Nearest integer, ties away from zero.
  mpz_class round_to_integer() const;

  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  int sign() const { return mpfr_sgn(value_); }

  Real& operator+=(const Real& rhs);
  Real& operator-=(const Real& rhs);
  Real& operator*=(const Real& rhs);
  Real& operator/=(const Real& rhs);
  Real& operator*=(long rhs);
  Real& operator/=(long rhs);
  Real operator-() const;

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend Real operator+(const Real& a, long b);
  friend Real operator-(const Real& a, long b);
  friend Real operator*(const Real& a, long b);
  friend Real operator/(const Real& a, long b);
  friend Real operator*(long a, const Real& b) { return b * a; }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);
  friend bool operator==(const Real& a, long b) { return mpfr_cmp_si(a.value_, b) == 0; }
  friend std::partial_ordering operator<=>(const Real& a, long b);

 private:
  mpfr_t value_;
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real log(const Real& x);
Real log2(const Real& x);
Real exp(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
Real atan2(const Real& y, const Real& x);
Real pow(const Real& x, long n);
Real gamma(const Real& x);
Real max(const Real& a, const Real& b);
Real min(const Real& a, const Real& b);

Real pi(Precision bits);
Real euler_e(Precision bits);
/// Natural log of a positive integer, computed at `bits`.
Real log_of(const mpz_class& n, Precision bits);
/// 2^e at the given precision.
Real pow2(long e, Precision bits);

struct Complex {
  Real re;
  Real im;

  explicit Complex(Precision bits = 64) : re(bits), im(bits) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  Precision precision() const { return std::max(re.precision(), im.precision()); }

  Complex& operator+=(const Complex& rhs);
  Complex& operator-=(const Complex& rhs);
  Complex& operator*=(const Complex& rhs);
  Complex& operator*=(const Real& rhs);
  Complex operator-() const { return Complex(-re, -im); }

  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator*(Complex a, const Real& b) { return a *= b; }
  friend Complex operator/(const Complex& a, const Complex& b);
};

/// |z|^2
Real norm(const Complex& z);
Real abs(const Complex& z);
Complex conj(const Complex& z);
/// exp(z) for complex z.
Complex exp(const Complex& z);
Complex pow(const Complex& z, unsigned n);
Complex square(const Complex& z);

}  // namespace modpoly
