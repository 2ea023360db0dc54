#include "modpoly/real.hpp"

#include <stdexcept>
#include <vector>

namespace modpoly {

namespace {

Precision wider(const Real& a, const Real& b) { return std::max(a.precision(), b.precision()); }

}  // namespace

Real::Real(Precision bits) {
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

Real::Real(long value, Precision bits) {
  mpfr_init2(value_, bits);
  mpfr_set_si(value_, value, MPFR_RNDN);
}

Real::Real(double value, Precision bits) {
  mpfr_init2(value_, bits);
  mpfr_set_d(value_, value, MPFR_RNDN);
}

Real::Real(const mpz_class& value, Precision bits) {
  mpfr_init2(value_, bits);
  mpfr_set_z(value_, value.get_mpz_t(), MPFR_RNDN);
}

Real::Real(const mpq_class& value, Precision bits) {
  mpfr_init2(value_, bits);
  mpfr_set_q(value_, value.get_mpq_t(), MPFR_RNDN);
}

Real Real::from_string(const std::string& literal, Precision bits) {
  Real r(bits);
  if (mpfr_set_str(r.value_, literal.c_str(), 10, MPFR_RNDN) != 0) {
    throw std::invalid_argument("not a decimal literal: " + literal);
  }
  return r;
}

Real::Real(const Real& other) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

Real::~Real() { mpfr_clear(value_); }

Real Real::with_precision(Precision bits) const {
  Real r(bits);
  mpfr_set(r.value_, value_, MPFR_RNDN);
  return r;
}

std::string Real::to_string(int digits) const {
  if (!is_finite()) {
    if (mpfr_nan_p(value_)) return "nan";
    return sign() > 0 ? "inf" : "-inf";
  }
  char* buffer = nullptr;
  mpfr_asprintf(&buffer, "%.*Re", digits - 1, value_);
  std::string out(buffer);
  mpfr_free_str(buffer);
  return out;
}

mpz_class Real::round_to_integer() const {
  if (!is_finite()) throw std::domain_error("cannot round a non-finite value");
  mpz_class z;
  mpfr_t tmp;
  mpfr_init2(tmp, precision() + 2);
  mpfr_round(tmp, value_);
  mpfr_get_z(z.get_mpz_t(), tmp, MPFR_RNDN);
  mpfr_clear(tmp);
  return z;
}

Real& Real::operator+=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator-=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator*=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator/=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator*=(long rhs) {
  mpfr_mul_si(value_, value_, rhs, MPFR_RNDN);
  return *this;
}

Real& Real::operator/=(long rhs) {
  mpfr_div_si(value_, value_, rhs, MPFR_RNDN);
  return *this;
}

Real Real::operator-() const {
  Real r(precision());
  mpfr_neg(r.value_, value_, MPFR_RNDN);
  return r;
}

Real operator+(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mpfr_add(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator-(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mpfr_sub(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator*(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mpfr_mul(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator/(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mpfr_div(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator+(const Real& a, long b) {
  Real r(a.precision());
  mpfr_add_si(r.value_, a.value_, b, MPFR_RNDN);
  return r;
}

Real operator-(const Real& a, long b) {
  Real r(a.precision());
  mpfr_sub_si(r.value_, a.value_, b, MPFR_RNDN);
  return r;
}

Real operator*(const Real& a, long b) {
  Real r(a.precision());
  mpfr_mul_si(r.value_, a.value_, b, MPFR_RNDN);
  return r;
}

Real operator/(const Real& a, long b) {
  Real r(a.precision());
  mpfr_div_si(r.value_, a.value_, b, MPFR_RNDN);
  return r;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.value_, b.value_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

std::partial_ordering operator<=>(const Real& a, long b) {
  if (mpfr_nan_p(a.value_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp_si(a.value_, b);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

#define MODPOLY_UNARY(name, fn)              \
  Real name(const Real& x) {                 \
    Real r(x.precision());                   \
    fn(r.get(), x.get(), MPFR_RNDN);         \
    return r;                                \
  }

MODPOLY_UNARY(abs, mpfr_abs)
MODPOLY_UNARY(sqrt, mpfr_sqrt)
MODPOLY_UNARY(log, mpfr_log)
MODPOLY_UNARY(log2, mpfr_log2)
MODPOLY_UNARY(exp, mpfr_exp)
MODPOLY_UNARY(sin, mpfr_sin)
MODPOLY_UNARY(cos, mpfr_cos)
MODPOLY_UNARY(gamma, mpfr_gamma)

#undef MODPOLY_UNARY

Real atan2(const Real& y, const Real& x) {
  Real r(wider(y, x));
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}

Real pow(const Real& x, long n) {
  Real r(x.precision());
  mpfr_pow_si(r.get(), x.get(), n, MPFR_RNDN);
  return r;
}

Real max(const Real& a, const Real& b) { return a < b ? b : a; }
Real min(const Real& a, const Real& b) { return b < a ? b : a; }

Real pi(Precision bits) {
  Real r(bits);
  mpfr_const_pi(r.get(), MPFR_RNDN);
  return r;
}

Real euler_e(Precision bits) {
  Real one(1L, bits);
  return exp(one);
}

Real log_of(const mpz_class& n, Precision bits) {
  if (n <= 0) throw std::domain_error("log of a non-positive integer");
  return log(Real(n, bits + 16)).with_precision(bits);
}

Real pow2(long e, Precision bits) {
  Real r(1L, bits);
  mpfr_mul_2si(r.get(), r.get(), e, MPFR_RNDN);
  return r;
}

Complex& Complex::operator+=(const Complex& rhs) {
  re += rhs.re;
  im += rhs.im;
  return *this;
}

Complex& Complex::operator-=(const Complex& rhs) {
  re -= rhs.re;
  im -= rhs.im;
  return *this;
}

Complex& Complex::operator*=(const Complex& rhs) {
  Real r = re * rhs.re - im * rhs.im;
  Real i = re * rhs.im + im * rhs.re;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

Complex& Complex::operator*=(const Real& rhs) {
  re *= rhs;
  im *= rhs;
  return *this;
}

Complex operator/(const Complex& a, const Complex& b) {
  const Real d = norm(b);
  Real r = (a.re * b.re + a.im * b.im) / d;
  Real i = (a.im * b.re - a.re * b.im) / d;
  return Complex(std::move(r), std::move(i));
}

Real norm(const Complex& z) { return z.re * z.re + z.im * z.im; }

Real abs(const Complex& z) {
  Real r(z.precision());
  mpfr_hypot(r.get(), z.re.get(), z.im.get(), MPFR_RNDN);
  return r;
}

Complex conj(const Complex& z) { return Complex(z.re, -z.im); }

Complex exp(const Complex& z) {
  const Precision bits = z.precision();
  Real modulus = exp(z.re.with_precision(bits));
  Real s(bits), c(bits);
  mpfr_sin_cos(s.get(), c.get(), z.im.get(), MPFR_RNDN);
  return Complex(modulus * c, modulus * s);
}

Complex square(const Complex& z) {
  Real r = (z.re + z.im) * (z.re - z.im);
  Real i = z.re * z.im;
  i *= 2L;
  return Complex(std::move(r), std::move(i));
}

Complex pow(const Complex& z, unsigned n) {
  Complex result(Real(1L, z.precision()), Real(z.precision()));
  Complex base = z;
  while (n > 0) {
    if (n & 1U) result *= base;
    n >>= 1U;
    if (n > 0) base = square(base);
  }
  return result;
}

}  // namespace modpoly
