#include "modpoly/halfplane.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

namespace modpoly {

namespace {

constexpr Precision kGuardBits = 32;
constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("SL2(Z) entry exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t to_int64(const mpz_class& v) {
  if (!v.fits_slong_p()) throw std::overflow_error("translation exceeds 64 bits");
  return v.get_si();
}

void swap_values(Complex& a, Complex& b) {
  mpfr_swap(a.re.get(), b.re.get());
  mpfr_swap(a.im.get(), b.im.get());
}

void add_in(Complex& a, const Complex& b) {
  mpfr_add(a.re.get(), a.re.get(), b.re.get(), kRnd);
  mpfr_add(a.im.get(), a.im.get(), b.im.get(), kRnd);
}

void sub_in(Complex& a, const Complex& b) {
  mpfr_sub(a.re.get(), a.re.get(), b.re.get(), kRnd);
  mpfr_sub(a.im.get(), a.im.get(), b.im.get(), kRnd);
}

Complex one(Precision bits) { return Complex(Real(1L, bits), Real(bits)); }

// e^{i pi k tau} for real k, at working precision.
Complex nome(const HalfPlanePoint& tau, long k, Precision bits) {
  const Real scale = pi(bits) * k;
  const Real re = -(tau.im().with_precision(bits) * scale);
  const Real im = tau.re().with_precision(bits) * scale;
  return exp(Complex(re, im));
}

bool near_cusp(const HalfPlanePoint& tau) {
  // Im tau >= sqrt(3)/2 - 2^-20, compared in double: the series length adapts
  // to Im tau, so only a coarse threshold is needed.
  return tau.im().to_double() >= std::sqrt(3.0) / 2.0 - std::ldexp(1.0, -20);
}

Complex to_precision(const Complex& z, Precision bits) {
  return Complex(z.re.with_precision(bits), z.im.with_precision(bits));
}

Real log_abs(const Complex& z, Precision bits) {
  // log|z| = log(|z|^2) / 2 avoids the square root.
  Real n = norm(to_precision(z, bits + 8));
  Real l = log(n);
  l /= 2;
  return l.with_precision(bits);
}

long default_inversion_bound(double re, double im) {
  const double lg = std::log2(1.0 + 1.0 / im);
  return 64 + 8 * static_cast<long>(std::ceil(lg)) + static_cast<long>(std::ceil(std::log2(1.0 + std::fabs(re))));
}

template <typename F>
void golden_section(Real& lo, Real& hi, bool maximize, const F& value, int iterations) {
  const Precision p = lo.precision();
  const Real inv_phi = (sqrt(Real(5L, p)) - 1) / 2;
  Real a = lo, b = hi;
  Real c = b - (b - a) * inv_phi;
  Real d = a + (b - a) * inv_phi;
  Real fc = value(c), fd = value(d);
  for (int it = 0; it < iterations; ++it) {
    const bool keep_left = maximize ? (fc > fd) : (fc < fd);
    if (keep_left) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = value(d);
    }
  }
  lo = a;
  hi = b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Points and matrices

HalfPlanePoint::HalfPlanePoint(Real re, Real im) : re_(std::move(re)), im_(std::move(im)) {
  if (!re_.is_finite() || !im_.is_finite() || im_.sign() <= 0) {
    throw std::domain_error("point not in the upper half-plane");
  }
  bits_ = std::max(re_.precision(), im_.precision());
}

HalfPlanePoint HalfPlanePoint::from_rational(const mpq_class& re, const mpq_class& im, Precision bits) {
  return HalfPlanePoint(Real(re, bits), Real(im, bits));
}

HalfPlanePoint HalfPlanePoint::i(Precision bits) { return HalfPlanePoint(Real(bits), Real(1L, bits)); }

HalfPlanePoint HalfPlanePoint::rho(Precision bits) {
  Real im = sqrt(Real(3L, bits + 8)) / 2;
  return HalfPlanePoint(Real(0.5, bits), im.with_precision(bits));
}

HalfPlanePoint HalfPlanePoint::imaginary(const Real& y) { return HalfPlanePoint(Real(y.precision()), y); }

UnimodularMatrix::UnimodularMatrix(std::int64_t m11, std::int64_t m12, std::int64_t m21, std::int64_t m22)
    : m11_(m11), m12_(m12), m21_(m21), m22_(m22) {
  const __int128 det = static_cast<__int128>(m11) * m22 - static_cast<__int128>(m12) * m21;
  if (det != 1) throw std::invalid_argument("matrix is not in SL2(Z)");
}

UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b) {
  using I = __int128;
  return UnimodularMatrix(checked(I(a.m11_) * b.m11_ + I(a.m12_) * b.m21_),
                          checked(I(a.m11_) * b.m12_ + I(a.m12_) * b.m22_),
                          checked(I(a.m21_) * b.m11_ + I(a.m22_) * b.m21_),
                          checked(I(a.m21_) * b.m12_ + I(a.m22_) * b.m22_));
}

bool UnimodularMatrix::same_action(const UnimodularMatrix& o) const {
  return *this == o || (m11_ == -o.m11_ && m12_ == -o.m12_ && m21_ == -o.m21_ && m22_ == -o.m22_);
}

Complex UnimodularMatrix::automorphy_factor(const HalfPlanePoint& tau) const {
  const Precision p = tau.precision_bits();
  Real re = tau.re().with_precision(p) * static_cast<long>(m21_);
  re += Real(static_cast<long>(m22_), p);
  Real im = tau.im().with_precision(p) * static_cast<long>(m21_);
  return Complex(std::move(re), std::move(im));
}

HalfPlanePoint UnimodularMatrix::apply(const HalfPlanePoint& tau) const {
  // Im(g tau) = Im tau / |c tau + d|^2 keeps the result strictly positive.
  const Precision p = tau.precision_bits();
  const Precision w = p + 16;
  const Real x = tau.re().with_precision(w), y = tau.im().with_precision(w);
  const Real abs2 = x * x + y * y;
  Real den = abs2 * static_cast<long>(m21_) * static_cast<long>(m21_);
  den += x * (2 * static_cast<long>(m21_) * static_cast<long>(m22_));
  den += Real(static_cast<long>(m22_) * static_cast<long>(m22_), w);
  Real num = abs2 * static_cast<long>(m11_) * static_cast<long>(m21_);
  num += x * (static_cast<long>(m11_) * static_cast<long>(m22_) + static_cast<long>(m12_) * static_cast<long>(m21_));
  num += Real(static_cast<long>(m12_) * static_cast<long>(m22_), w);
  return HalfPlanePoint((num / den).with_precision(p), (y / den).with_precision(p));
}

RationalPoint UnimodularMatrix::apply(const RationalPoint& point) const {
  RationalPoint tau = point;
  tau.re.canonicalize();
  tau.im.canonicalize();
  const mpq_class a(static_cast<long>(m11_)), b(static_cast<long>(m12_));
  const mpq_class c(static_cast<long>(m21_)), d(static_cast<long>(m22_));
  const mpq_class abs2 = tau.re * tau.re + tau.im * tau.im;
  const mpq_class den = c * c * abs2 + 2 * c * d * tau.re + d * d;
  const mpq_class num = a * c * abs2 + (a * d + b * c) * tau.re + b * d;
  return RationalPoint{mpq_class(num / den), mpq_class(tau.im / den)};
}

void PrecisionPolicy::validate() const {
  if (base_bits < 64) throw std::invalid_argument("base precision below 64 bits");
  if (retry_den <= 0 || retry_num <= retry_den) throw std::invalid_argument("retry factor must exceed 1");
  if (max_retries < 0) throw std::invalid_argument("negative retry count");
}

Precision PrecisionPolicy::bits_for_attempt(int attempt) const {
  mpz_class bits = base_bits;
  for (int k = 0; k < attempt; ++k) {
    bits = bits * retry_num;
    mpz_cdiv_q_ui(bits.get_mpz_t(), bits.get_mpz_t(), static_cast<unsigned long>(retry_den));
  }
  return static_cast<Precision>(bits.get_si());
}

// ---------------------------------------------------------------------------
// Reduction

Reduction reduce_to_F(const HalfPlanePoint& tau, long max_inversions) {
  const Precision p = tau.precision_bits();
  Real x = tau.re().with_precision(p);
  Real y = tau.im().with_precision(p);
  const Real eps = pow2(-static_cast<long>(p / 2), p);
  const Real half(0.5, p);
  const Real lower = -half + eps;
  const Real one_minus = Real(1L, p) - eps;
  const Real one_plus = Real(1L, p) + eps;
  const long bound = max_inversions > 0 ? max_inversions : default_inversion_bound(x.to_double(), y.to_double());
  UnimodularMatrix g = UnimodularMatrix::identity();
  long inversions = 0;

  const auto invert = [&](const Real& r2) {
    x = -x / r2;
    y = y / r2;
    g = UnimodularMatrix::S() * g;
  };

  for (;;) {
    Real shifted = x - half;
    mpfr_ceil(shifted.get(), shifted.get());
    mpz_class n;
    mpfr_get_z(n.get_mpz_t(), shifted.get(), MPFR_RNDN);
    if (n != 0) {
      x -= Real(n, p);
      g = UnimodularMatrix::T(-to_int64(n)) * g;
    }
    if (x <= lower) {
      x += Real(1L, p);
      g = UnimodularMatrix::T(1) * g;
    }
    const Real r2 = x * x + y * y;
    if (r2 < one_minus) {
      if (++inversions > bound) throw ReductionError("reduction to F did not terminate within the iteration bound");
      invert(r2);
      continue;
    }
    if (r2 <= one_plus && x.sign() < 0) invert(r2);
    break;
  }
  return Reduction{HalfPlanePoint(std::move(x), std::move(y)), g};
}

Reduction reduce_to_F(const HalfPlanePoint& tau) { return reduce_to_F(tau, 0); }

RationalReduction reduce_to_F(const RationalPoint& tau, long max_inversions) {
  if (sgn(tau.im) <= 0) throw std::domain_error("point not in the upper half-plane");
  mpq_class x = tau.re, y = tau.im;
  x.canonicalize();
  y.canonicalize();
  const mpq_class half(1, 2);
  // Exact arithmetic always terminates; the bound only catches runaway inputs.
  const long bits = static_cast<long>(mpz_sizeinbase(y.get_den_mpz_t(), 2)) + 1;
  const long bound = max_inversions > 0 ? max_inversions : 64 + 8 * bits;
  UnimodularMatrix g = UnimodularMatrix::identity();
  long inversions = 0;

  const auto invert = [&](const mpq_class& r2) {
    x = -x / r2;
    y = y / r2;
    g = UnimodularMatrix::S() * g;
  };

  for (;;) {
    const mpq_class shifted = x - half;
    mpz_class n;
    mpz_cdiv_q(n.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
    if (n != 0) {
      x -= n;
      g = UnimodularMatrix::T(-to_int64(n)) * g;
    }
    const mpq_class r2 = x * x + y * y;
    if (r2 < 1) {
      if (++inversions > bound) throw ReductionError("reduction to F did not terminate within the iteration bound");
      invert(r2);
      continue;
    }
    if (r2 == 1 && sgn(x) < 0) invert(r2);
    break;
  }
  return RationalReduction{RationalPoint{x, y}, g};
}

RationalReduction reduce_to_F(const RationalPoint& tau) { return reduce_to_F(tau, 0); }

bool in_fundamental_domain(const RationalPoint& tau) {
  if (sgn(tau.im) <= 0) return false;
  if (tau.re <= mpq_class(-1, 2) || tau.re > mpq_class(1, 2)) return false;
  const mpq_class r2 = tau.re * tau.re + tau.im * tau.im;
  return r2 > 1 || (r2 == 1 && sgn(tau.re) >= 0);
}

// ---------------------------------------------------------------------------
// q-series

long series_terms(Precision bits, double im_tau) {
  // The tails are bounded by a geometric series in |q| = e^{-2 pi Im tau}, so
  // |q|^T <= 2^{-(P + 32)} leaves 32 guard bits for the accumulated rounding.
  const double per_term = 2.0 * std::numbers::pi * im_tau * std::numbers::log2e;
  return static_cast<long>(std::ceil(static_cast<double>(bits + 32) / per_term)) + 16;
}

namespace {

// Scratch registers for the series loops; every value shares precision w.
struct Workspace {
  explicit Workspace(Precision w) : t1(w), t2(w), t3(w), scratch(w) {}
  Real t1, t2, t3;
  Complex scratch;

  // out = a * b with three real products; out must not alias a or b.
  void mul_to(Complex& out, const Complex& a, const Complex& b) {
    mpfr_add(t1.get(), a.re.get(), a.im.get(), kRnd);
    mpfr_mul(t1.get(), t1.get(), b.re.get(), kRnd);  // c (a + b)
    mpfr_sub(t2.get(), b.im.get(), b.re.get(), kRnd);
    mpfr_mul(t2.get(), t2.get(), a.re.get(), kRnd);  // a (d - c)
    mpfr_add(t3.get(), b.re.get(), b.im.get(), kRnd);
    mpfr_mul(t3.get(), t3.get(), a.im.get(), kRnd);  // b (c + d)
    mpfr_sub(out.re.get(), t1.get(), t3.get(), kRnd);
    mpfr_add(out.im.get(), t1.get(), t2.get(), kRnd);
  }
  void mul_in(Complex& a, const Complex& b) {
    mul_to(scratch, a, b);
    swap_values(a, scratch);
  }
  // (a + bi)^2 = (a + b)(a - b) + 2ab i
  void square_in(Complex& a) {
    mpfr_add(t1.get(), a.re.get(), a.im.get(), kRnd);
    mpfr_sub(t2.get(), a.re.get(), a.im.get(), kRnd);
    mpfr_mul(t3.get(), a.re.get(), a.im.get(), kRnd);
    mpfr_mul(a.re.get(), t1.get(), t2.get(), kRnd);
    mpfr_mul_2ui(a.im.get(), t3.get(), 1, kRnd);
  }
  Complex product(const Complex& a, const Complex& b) {
    Complex out(a.precision());
    mul_to(out, a, b);
    return out;
  }
  // Resizes the scratch registers; their values are discarded.
  void set_precision(Precision p) {
    for (Real* r : {&t1, &t2, &t3, &scratch.re, &scratch.im}) mpfr_set_prec(r->get(), p);
  }
};

void round_to(Complex& z, Precision p) {
  mpfr_prec_round(z.re.get(), p, kRnd);
  mpfr_prec_round(z.im.get(), p, kRnd);
}

// Theta series in the half nome qh = e^{i pi tau}, split by parity:
// even = 1 + 2 sum_{n even > 0} qh^{n^2}, odd = 2 sum_{n odd} qh^{n^2},
// so theta3 = even + odd and theta4 = even - odd.
struct ThetaParts {
  Complex qh;
  Complex even;
  Complex odd;
};

ThetaParts theta_parts(const HalfPlanePoint& tau, long terms, Precision w, Workspace& ws) {
  // With Q = qh^4 the even terms are Q^{k^2} and the odd ones qh Q^{k^2 + k}, so
  //   even = 1 + 2 sum_{k >= 1} Q^{k^2},  odd = 2 qh (1 + sum_{k >= 1} Q^{k^2 + k}).
  // Both ladders share Q^k: Q^{k^2 + k} = Q^{k^2} Q^k, Q^{(k+1)^2} = Q^{k^2 + k} Q^{k+1}.
  Complex qh = nome(tau, 1, w);
  Complex power = qh;  // Q^k
  ws.square_in(power);
  ws.square_in(power);
  const Complex q4 = power;
  Complex even(w), odd(w);
  Complex square = one(w);  // Q^{k^2}
  Complex oblong = one(w);  // Q^{k^2 + k}
  // Q^e is 2^{-4 e c} (c = pi Im tau log2 e) relative to the sum it joins, so
  // the ladder runs at w - 4 e c bits for the exponent e it is about to produce.
  const double c = 4.0 * std::numbers::pi * tau.im().to_double() * std::numbers::log2e;
  const auto bits_for = [&](long e) -> Precision {
    const double drop = static_cast<double>(e) * c;
    return drop >= static_cast<double>(w) - 64.0 ? 64 : w - static_cast<Precision>(drop);
  };
  Complex q4_low = q4;
  for (long k = 1; 4 * k * k <= 2 * terms; ++k) {
    const Precision p = bits_for(k * k - k);
    if (p < square.re.precision()) {
      round_to(square, p);
      round_to(oblong, p);
      round_to(power, p);
      round_to(q4_low, p);
      ws.set_precision(p);
    }
    if (k > 1) ws.mul_in(power, q4_low);  // Q^k
    ws.mul_to(square, oblong, power);      // Q^{(k-1)^2 + (k-1) + k} = Q^{k^2}
    add_in(even, square);
    ws.mul_to(oblong, square, power);      // Q^{k^2 + k}
    add_in(odd, oblong);
  }
  ws.set_precision(w);
  mpfr_mul_2ui(even.re.get(), even.re.get(), 1, kRnd);
  mpfr_mul_2ui(even.im.get(), even.im.get(), 1, kRnd);
  add_in(even, one(w));
  add_in(odd, one(w));
  ws.mul_in(odd, qh);
  mpfr_mul_2ui(odd.re.get(), odd.re.get(), 1, kRnd);
  mpfr_mul_2ui(odd.im.get(), odd.im.get(), 1, kRnd);
  return ThetaParts{std::move(qh), std::move(even), std::move(odd)};
}

// From E = even, O = odd:
//   theta3^2 + theta4^2 = 2 (E^2 + O^2), theta3 theta4 = E^2 - O^2,
//   theta2^4 = theta3^4 - theta4^4 = 8 E O (E^2 + O^2),
// none of which cancel when |O| is small. Then
//   E4 = (theta2^8 + theta3^8 + theta4^8) / 2, Delta = (theta2 theta3 theta4)^8 / 256.
struct ThetaValues {
  Complex e4;
  Complex delta;
};

ThetaValues theta_values(const ThetaParts& t, Precision w, Workspace& ws) {
  Complex e2 = t.even, o2 = t.odd;
  ws.square_in(e2);
  ws.square_in(o2);
  const Complex sum = e2 + o2;       // E^2 + O^2
  const Complex t34 = e2 - o2;       // theta3 theta4
  Complex t2_4 = ws.product(t.even, t.odd);
  ws.mul_in(t2_4, sum);
  t2_4 *= Real(8L, w);               // theta2^4
  Complex t2_8 = t2_4;
  ws.square_in(t2_8);

  Complex sum2 = sum;
  ws.square_in(sum2);
  Complex t34_2 = t34;
  ws.square_in(t34_2);               // (theta3 theta4)^2
  Complex fourth = sum2 * Real(4L, w) - t34_2 * Real(2L, w);  // theta3^4 + theta4^4
  Complex t34_4 = t34_2;
  ws.square_in(t34_4);
  Complex t34_8 = t34_4;
  ws.square_in(t34_8);
  Complex eighth = fourth;
  ws.square_in(eighth);
  sub_in(eighth, t34_4 * Real(2L, w));  // theta3^8 + theta4^8

  Complex e4 = t2_8 + eighth;
  e4 *= Real(0.5, w);
  Complex delta = ws.product(t2_8, t34_8);
  mpfr_div_2ui(delta.re.get(), delta.re.get(), 8, kRnd);
  mpfr_div_2ui(delta.im.get(), delta.im.get(), 8, kRnd);
  return ThetaValues{std::move(e4), std::move(delta)};
}

// Euler's pentagonal series: prod (1 - q^n) = sum_k (-1)^k q^{k(3k-1)/2}
// over both signs of k. Running powers are q^k, q^{3k-2} and q^{k(3k-1)/2};
// the partner exponent k(3k+1)/2 is the last times q^k.
Complex pentagonal(const Complex& q, long terms, Precision w, Workspace& ws) {
  Complex sum = one(w);
  Complex q3 = ws.product(q, q);
  ws.mul_in(q3, q);
  Complex qk = one(w);
  Complex step = q;
  Complex g1 = one(w);
  Complex g2(w);
  for (long k = 1;; ++k) {
    const long e1 = k * (3 * k - 1) / 2;
    if (e1 > terms) break;
    ws.mul_in(qk, q);
    ws.mul_in(g1, step);
    ws.mul_in(step, q3);
    ws.mul_to(g2, g1, qk);
    if (k % 2 == 1) {
      sub_in(sum, g1);
      if (e1 + k <= terms) sub_in(sum, g2);
    } else {
      add_in(sum, g1);
      if (e1 + k <= terms) add_in(sum, g2);
    }
  }
  return sum;
}

void require_near_cusp(const HalfPlanePoint& tau) {
  if (!near_cusp(tau)) throw std::domain_error("Im tau below sqrt(3)/2; reduce first");
}

}  // namespace

ModularValues modular_values_near_cusp(const HalfPlanePoint& tau, Precision bits) {
  require_near_cusp(tau);
  const Precision w = bits + kGuardBits;
  const long terms = series_terms(bits, tau.im().to_double());
  Workspace ws(w);
  const ThetaParts parts = theta_parts(tau, terms, w, ws);
  const ThetaValues tv = theta_values(parts, w, ws);

  // Delta = q * pent^24 = q * pent^8 * pent^16
  const Complex q = ws.product(parts.qh, parts.qh);
  Complex p8 = pentagonal(q, terms, w, ws);
  ws.square_in(p8);
  ws.square_in(p8);
  ws.square_in(p8);
  Complex p16 = p8;
  ws.square_in(p16);
  Complex delta = ws.product(p8, p16);
  ws.mul_in(delta, q);

  Complex e4_cubed = tv.e4;
  ws.square_in(e4_cubed);
  ws.mul_in(e4_cubed, tv.e4);
  const Complex j = e4_cubed / delta;
  return ModularValues{to_precision(delta, bits), to_precision(tv.e4, bits), to_precision(j, bits)};
}

Complex j_near_cusp(const HalfPlanePoint& tau, Precision bits) {
  require_near_cusp(tau);
  const Precision w = bits + kGuardBits;
  Workspace ws(w);
  const ThetaParts parts = theta_parts(tau, series_terms(bits, tau.im().to_double()), w, ws);
  const ThetaValues tv = theta_values(parts, w, ws);
  Complex e4_cubed = tv.e4;
  ws.square_in(e4_cubed);
  ws.mul_in(e4_cubed, tv.e4);
  return to_precision(e4_cubed / tv.delta, bits);
}

namespace {

// Values at tau together with the automorphy factor c tau + d of the
// reduction used (the identity factor when tau is already near the cusp).
struct Evaluation {
  ModularValues at_reduced;
  Complex factor;
  bool reduced;
};

HalfPlanePoint widened(const HalfPlanePoint& tau, Precision bits) {
  const Precision w = std::max(tau.precision_bits(), bits + kGuardBits);
  return HalfPlanePoint(tau.re().with_precision(w), tau.im().with_precision(w));
}

Evaluation evaluate_any(const HalfPlanePoint& tau, Precision bits) {
  if (near_cusp(tau)) return Evaluation{modular_values_near_cusp(tau, bits), one(bits), false};
  // Reduce with extra bits so that the inversions do not eat into P.
  const HalfPlanePoint wide = widened(tau, bits);
  const Reduction r = reduce_to_F(wide);
  return Evaluation{modular_values_near_cusp(r.point, bits + 16), r.transform.automorphy_factor(wide), true};
}

}  // namespace

Complex delta(const HalfPlanePoint& tau, Precision bits) {
  Evaluation e = evaluate_any(tau, bits);
  if (!e.reduced) return e.at_reduced.delta;
  // Delta(g tau) = (c tau + d)^12 Delta(tau)
  return to_precision(e.at_reduced.delta / pow(e.factor, 12), bits);
}

Complex eisenstein_e4(const HalfPlanePoint& tau, Precision bits) {
  Evaluation e = evaluate_any(tau, bits);
  if (!e.reduced) return e.at_reduced.e4;
  return to_precision(e.at_reduced.e4 / pow(e.factor, 4), bits);
}

Complex j_value(const HalfPlanePoint& tau, Precision bits) {
  if (near_cusp(tau)) return j_near_cusp(tau, bits);
  return j_near_cusp(reduce_to_F(widened(tau, bits)).point, bits);
}

Real f_of(const HalfPlanePoint& tau, Precision bits) {
  const Complex d = delta(tau, bits + 16);
  const Complex e4 = eisenstein_e4(tau, bits + 16);
  const Real log_delta = log_abs(d, bits + 16);
  Real log_e4_cubed = log_abs(e4, bits + 16);
  log_e4_cubed *= 3L;
  return max(log_delta, log_e4_cubed).with_precision(bits);
}

Real log_delta_im6(const HalfPlanePoint& tau, Precision bits) {
  Real out = log_abs(delta(tau, bits + 16), bits + 16);
  out += log(tau.im().with_precision(bits + 16)) * 6L;
  return out.with_precision(bits);
}

// ---------------------------------------------------------------------------
// Special values

Real delta_rho_closed_form(Precision bits) {
  const Precision w = bits + 32;
  const Real g = gamma(Real(1L, w) / Real(3L, w));
  return (-(pow(g, 36) * 27L) / pow(pi(w) * 2L, 24)).with_precision(bits);
}

Real delta_i_closed_form(Precision bits) {
  const Precision w = bits + 32;
  const Real g = gamma(Real(1L, w) / Real(4L, w));
  return (pow(g, 24) / (pow2(24, w) * pow(pi(w), 18))).with_precision(bits);
}

Real f_i_closed_form(Precision bits) {
  const Precision w = bits + 32;
  const Real g = gamma(Real(1L, w) / Real(4L, w));
  return log(pow(g, 24) * 27L / (pow2(18, w) * pow(pi(w), 18))).with_precision(bits);
}

Real lemniscate_integral(Precision bits) {
  // Tanh-sinh on [0, 1]: t = 1 / (1 + e^{-2u}), u = (pi/2) sinh s. The
  // integrand is evaluated from 1 - t directly so the endpoint singularity
  // (1 - t)^{-1/2} keeps full relative accuracy.
  const Precision w = bits + kGuardBits;
  const Real half_pi = pi(w) / 2L;
  const Real tiny = pow2(-static_cast<long>(w) - 8, w);

  const auto term = [&](const Real& s) {
    const Real u = half_pi * (exp(s) - exp(-s)) / 2L;
    const Real e = exp(u * 2L);
    const Real t = e / (e + 1L);
    const Real one_minus_t = Real(1L, w) / (e + 1L);
    const Real dt = half_pi * (exp(s) + exp(-s)) / 2L * t * one_minus_t * 2L;
    const Real integrand = Real(1L, w) / sqrt(one_minus_t * (t + 1L) * (t * t + 1L));
    return dt * integrand;
  };

  // Sum of term(k h) over k in `parity` class (all integers or odd only).
  const auto partial = [&](const Real& h, bool odd_only) {
    Real sum(w);
    const long step = odd_only ? 2 : 1;
    const long first = odd_only ? 1 : 0;
    for (long k = first;; k += step) {
      const Real s = h * k;
      const Real plus = term(s);
      Real both = plus;
      if (k != 0) both += term(-s);
      sum += both;
      if (k > 0 && abs(both) < tiny) break;
      if (k > 1000000) throw std::runtime_error("tanh-sinh sum did not converge");
    }
    return sum;
  };

  Real h(1L, w);
  Real sum = partial(h, false);
  Real estimate = sum * h;
  const Real tolerance = pow2(-static_cast<long>(bits) - 8, w);
  for (int level = 1; level <= 24; ++level) {
    h /= 2L;
    sum += partial(h, true);
    const Real next = sum * h;
    const bool done = abs(next - estimate) < tolerance;
    estimate = next;
    if (done) return estimate.with_precision(bits);
  }
  throw std::runtime_error("tanh-sinh quadrature did not converge");
}

Real delta_i_from_lemniscate(Precision bits) {
  const Precision w = bits + 32;
  const Real integral = lemniscate_integral(w);
  return (pow2(18, w) / pow(pi(w) * 2L, 12) * pow(integral, 12)).with_precision(bits);
}

// ---------------------------------------------------------------------------
// Contour scan

namespace {

struct Curve {
  Real lo;
  Real hi;
  std::function<HalfPlanePoint(const Real&)> point;
};

struct Candidate {
  Real value;
  Real param;
};

}  // namespace

ContourExtrema contour_extrema(std::size_t density, Precision bits) {
  if (density < 1000) throw std::invalid_argument("grid density below 10^3");
  const Precision p = bits;
  const Real pi_p = pi(p);
  const HalfPlanePoint rho = HalfPlanePoint::rho(p);
  const Real one(1L, p);

  // Point of |j| = 1 on the ray from rho at angle phi. j has a zero of order
  // three at rho and |j| grows along each ray, so bisection on the radius works.
  const Real r_max(0.05, p);
  const auto curve_point = [&](const Real& phi) {
    const Real c = cos(phi), s = sin(phi);
    const auto at = [&](const Real& r) { return HalfPlanePoint(rho.re() + r * c, rho.im() + r * s); };
    if (abs(j_value(at(r_max), p)) <= one) throw ReductionError("|j| = 1 not bracketed on a ray from rho");
    Real lo(p), hi = r_max;
    for (int it = 0; it < 40; ++it) {
      const Real mid = (lo + hi) / 2L;
      if (abs(j_value(at(mid), p)) < one) lo = mid;
      else hi = mid;
    }
    return at((lo + hi) / 2L);
  };

  std::vector<Curve> curves;
  curves.push_back(Curve{pi_p / 3L, pi_p / 2L, [&](const Real& theta) { return HalfPlanePoint(cos(theta), sin(theta)); }});
  curves.push_back(Curve{rho.im(), Real(4L, p), [&](const Real& y) { return HalfPlanePoint(Real(0.5, p), y); }});
  curves.push_back(Curve{pi_p / 2L, pi_p * 5L / 6L, curve_point});

  const auto f_at = [&](const Curve& c, const Real& param) { return f_of(c.point(param), p); };

  std::optional<Candidate> best_min, best_max;
  std::size_t best_min_curve = 0, best_max_curve = 0;
  const long n = static_cast<long>(density);
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const Curve& c = curves[ci];
    const Real step = (c.hi - c.lo) / (n - 1);
    std::vector<Real> values;
    values.reserve(density);
    long imin = 0, imax = 0;
    for (long k = 0; k < n; ++k) {
      values.push_back(f_at(c, c.lo + step * k));
      if (values[k] < values[imin]) imin = k;
      if (values[k] > values[imax]) imax = k;
    }
    // Golden-section refinement on the neighbouring grid cells.
    const auto refine = [&](long k, bool maximize) {
      Real lo = c.lo + step * std::max(k - 1, 0L);
      Real hi = c.lo + step * std::min(k + 1, n - 1);
      golden_section(lo, hi, maximize, [&](const Real& t) { return f_at(c, t); }, 60);
      Real param = (lo + hi) / 2L;
      Real value = f_at(c, param);
      // The refined value never loses to the grid sample it started from.
      if (maximize ? value < values[k] : value > values[k]) return Candidate{values[k], c.lo + step * k};
      return Candidate{value, param};
    };
    Candidate mn = refine(imin, false);
    Candidate mx = refine(imax, true);
    if (!best_min || mn.value < best_min->value) {
      best_min = mn;
      best_min_curve = ci;
    }
    if (!best_max || mx.value > best_max->value) {
      best_max = mx;
      best_max_curve = ci;
    }
  }
  return ContourExtrema{best_min->value, curves[best_min_curve].point(best_min->param), best_max->value,
                        curves[best_max_curve].point(best_max->param), density, density, density};
}

// ---------------------------------------------------------------------------
// Inverse j on the boundary of F

HalfPlanePoint inverse_j_real(const Real& j0, Precision bits) {
  const Precision w = bits + 16;
  if (j0 == 0) return HalfPlanePoint::rho(bits);
  if (j0 == 1728) return HalfPlanePoint::i(bits);

  const Real target = j0.with_precision(w);
  // Bisect a parameter t on [lo, hi] along which Re j is monotone.
  const auto bisect = [&](Real lo, Real hi, bool increasing, const std::function<HalfPlanePoint(const Real&)>& at) {
    const Real width = pow2(-static_cast<long>(bits) - 4, w);
    while (hi - lo > width * max(abs(hi), Real(1L, w))) {
      const Real mid = (lo + hi) / 2L;
      const Real jm = j_value(at(mid), w).re;
      if ((jm < target) == increasing) lo = mid;
      else hi = mid;
    }
    const HalfPlanePoint tau = at((lo + hi) / 2L);
    return HalfPlanePoint(tau.re().with_precision(bits), tau.im().with_precision(bits));
  };

  if (j0 > 1728) {
    // j(iy) ~ e^{2 pi y}; grow the bracket until it contains j0.
    const auto at = [&](const Real& y) { return HalfPlanePoint(Real(w), y); };
    Real hi(2L, w);
    while (j_value(at(hi), w).re < target) hi *= 2L;
    return bisect(Real(1L, w), hi, true, at);
  }
  if (j0 > 0) {
    const Real pi_w = pi(w);
    const auto at = [&](const Real& theta) { return HalfPlanePoint(cos(theta), sin(theta)); };
    return bisect(pi_w / 3L, pi_w / 2L, true, at);
  }
  const auto at = [&](const Real& y) { return HalfPlanePoint(Real(0.5, w), y); };
  Real hi(2L, w);
  while (j_value(at(hi), w).re > target) hi *= 2L;
  const Real lo = sqrt(Real(3L, w)) / 2L;
  return bisect(lo, hi, false, at);
}

}  // namespace modpoly
