#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "modpoly/halfplane.hpp"

using namespace modpoly;

namespace {

constexpr Precision kP = 256;

// Oracle: integer q-expansion coefficients of j = E4^3 / Delta, built from
// sigma_3 and the plain product q prod (1 - q^n)^24 in exact arithmetic.
// Returned as c[0..len) for j = q^{-1} sum c[k] q^k.
std::vector<mpz_class> j_coefficients(std::size_t len) {
  std::vector<mpz_class> e4(len, 0);
  e4[0] = 1;
  for (std::size_t n = 1; n < len; ++n) {
    mpz_class s = 0;
    for (std::size_t d = 1; d <= n; ++d)
      if (n % d == 0) s += mpz_class(d) * d * d;
    e4[n] = 240 * s;
  }
  const auto mul = [len](const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
    std::vector<mpz_class> c(len, 0);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t k = 0; i + k < len; ++k) c[i + k] += a[i] * b[k];
    return c;
  };
  const auto e4_cubed = mul(mul(e4, e4), e4);
  // prod (1 - q^n)^24, i.e. Delta / q
  std::vector<mpz_class> prod(len, 0);
  prod[0] = 1;
  for (std::size_t n = 1; n < len; ++n)
    for (int r = 0; r < 24; ++r)
      for (std::size_t i = len; i-- > n;) prod[i] -= prod[i - n];
  // series division e4_cubed / prod, leading coefficient 1
  std::vector<mpz_class> out(len, 0);
  for (std::size_t k = 0; k < len; ++k) {
    mpz_class v = e4_cubed[k];
    for (std::size_t i = 1; i <= k; ++i) v -= prod[i] * out[k - i];
    out[k] = v;
  }
  return out;
}

Complex j_by_expansion(const HalfPlanePoint& tau, const std::vector<mpz_class>& c, Precision bits) {
  const Real two_pi = pi(bits) * 2L;
  const Complex q = exp(Complex(-(tau.im() * two_pi), tau.re() * two_pi));
  Complex sum(bits), power(Real(1L, bits), Real(bits));
  for (const auto& ck : c) {
    sum += power * Real(ck, bits);
    power *= q;
  }
  return sum / q;
}

// Oracle: Delta from the truncated product itself, at moderate precision.
Complex delta_by_product(const HalfPlanePoint& tau, int factors, Precision bits) {
  const Real two_pi = pi(bits) * 2L;
  const Complex q = exp(Complex(-(tau.im() * two_pi), tau.re() * two_pi));
  Complex prod(Real(1L, bits), Real(bits)), qn = q;
  for (int n = 1; n <= factors; ++n) {
    prod *= Complex(Real(1L, bits), Real(bits)) - qn;
    qn *= q;
  }
  return q * pow(prod, 24);
}

Real rel_err(const Complex& a, const Complex& b) {
  const Real denom = max(abs(b), Real(1e-300, a.precision()));
  return abs(a - b) / denom;
}

UnimodularMatrix random_sl2(std::mt19937_64& rng, long bound) {
  std::uniform_int_distribution<long> dist(-bound, bound);
  for (;;) {
    const long c = dist(rng), d = dist(rng);
    if (std::gcd(c, d) != 1) continue;
    // a d - b c = 1 by extended Euclid
    long old_r = d, r = c, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
      const long qt = old_r / r;
      old_r -= qt * r;
      std::swap(old_r, r);
      old_s -= qt * s;
      std::swap(old_s, s);
      old_t -= qt * t;
      std::swap(old_t, t);
    }
    // old_s * d + old_t * c = old_r = +-1
    long a = old_s * old_r, b = -old_t * old_r;
    if (std::labs(a) > bound * bound || std::labs(b) > bound * bound) continue;
    return UnimodularMatrix(a, b, c, d);
  }
}

HalfPlanePoint random_point(std::mt19937_64& rng, Precision bits) {
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.3, 2.5);
  return HalfPlanePoint(Real(re(rng), bits), Real(im(rng), bits));
}

}  // namespace

TEST(HalfPlanePoint, RejectsLowerHalfPlane) {
  EXPECT_THROW(HalfPlanePoint(Real(0L, 64), Real(0L, 64)), std::domain_error);
  EXPECT_THROW(HalfPlanePoint(Real(0L, 64), Real(-1L, 64)), std::domain_error);
}

TEST(UnimodularMatrix, DeterminantAndProducts) {
  EXPECT_THROW(UnimodularMatrix(2, 0, 0, 1), std::invalid_argument);
  const auto s = UnimodularMatrix::S();
  EXPECT_TRUE((s * s).same_action(UnimodularMatrix::identity()));
  EXPECT_EQ(UnimodularMatrix::T(2) * UnimodularMatrix::T(3), UnimodularMatrix::T(5));
}

TEST(PrecisionPolicy, Validation) {
  PrecisionPolicy p;
  EXPECT_NO_THROW(p.validate());
  p.base_bits = 32;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PrecisionPolicy{100, 3, 2, 2};
  EXPECT_EQ(p.bits_for_attempt(0), 100);
  EXPECT_EQ(p.bits_for_attempt(1), 150);
  EXPECT_EQ(p.bits_for_attempt(2), 225);
  p.retry_num = 2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Reduce, Examples) {
  const auto r1 = reduce_to_F(RationalPoint{5, 1});
  EXPECT_EQ(r1.point, (RationalPoint{0, 1}));
  EXPECT_EQ(r1.transform, UnimodularMatrix::T(-5));

  const auto r2 = reduce_to_F(RationalPoint{0, mpq_class(1, 2)});
  EXPECT_EQ(r2.point, (RationalPoint{0, 2}));
  EXPECT_TRUE(r2.transform.same_action(UnimodularMatrix::S()));

  const auto r3 = reduce_to_F(RationalPoint{mpq_class(1, 2), mpq_class(1, 2)});
  EXPECT_EQ(r3.point, (RationalPoint{0, 1}));
  EXPECT_TRUE(r3.transform.same_action(UnimodularMatrix::T(1) * UnimodularMatrix::S()));

  const auto m = reduce_to_F(HalfPlanePoint::from_rational(mpq_class(1, 2), mpq_class(1, 2), kP));
  EXPECT_LT(abs(m.point.re()).to_double(), 1e-70);
  EXPECT_LT(abs(m.point.im() - 1L).to_double(), 1e-70);
}

TEST(Reduce, BoundaryConventions) {
  // Re = -1/2 moves to +1/2; the left half of the arc maps to the right half.
  EXPECT_EQ(reduce_to_F(RationalPoint{mpq_class(-1, 2), 2}).point, (RationalPoint{mpq_class(1, 2), 2}));
  const RationalPoint left{mpq_class(-5, 13), mpq_class(12, 13)};
  EXPECT_EQ(reduce_to_F(left).point, (RationalPoint{mpq_class(5, 13), mpq_class(12, 13)}));
  EXPECT_FALSE(in_fundamental_domain(left));
  const auto num = reduce_to_F(left.to_point(kP));
  EXPECT_NEAR(num.point.re().to_double(), 5.0 / 13.0, 1e-15);
}

TEST(Reduce, IterationCapSignalsFailure) {
  const RationalPoint deep{mpq_class(13, 31), mpq_class(1, 100000)};
  EXPECT_THROW(reduce_to_F(deep, 1), ReductionError);
  EXPECT_THROW(reduce_to_F(deep.to_point(kP), 1), ReductionError);
  EXPECT_NO_THROW(reduce_to_F(deep));
}

TEST(Reduce, ExactAndFloatingAgreeAndAreIdempotent) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(-500, 500), den(1, 97);
  for (int k = 0; k < 200; ++k) {
    const RationalPoint tau{mpq_class(num(rng), den(rng)), mpq_class(1 + std::labs(num(rng)), 100 * den(rng))};
    const auto exact = reduce_to_F(tau);
    ASSERT_TRUE(in_fundamental_domain(exact.point));
    ASSERT_EQ(exact.transform.apply(tau), exact.point);
    const auto again = reduce_to_F(exact.point);
    ASSERT_EQ(again.point, exact.point);
    ASSERT_EQ(again.transform, UnimodularMatrix::identity());

    const auto fl = reduce_to_F(tau.to_point(kP));
    const auto target = exact.point.to_point(kP);
    ASSERT_LT(abs(fl.point.re() - target.re()).to_double(), 1e-60);
    ASSERT_LT(abs(fl.point.im() - target.im()).to_double(), 1e-60);
    const auto fl_again = reduce_to_F(fl.point);
    ASSERT_EQ(fl_again.transform, UnimodularMatrix::identity());
  }
}

TEST(SeriesTerms, MatchesFormula) {
  // ceil((P + 32) / (pi sqrt(3) log2 e)) + 16 at Im tau = sqrt(3)/2
  EXPECT_EQ(series_terms(256, std::sqrt(3.0) / 2), 53);
  EXPECT_LT(series_terms(256, 10.0), series_terms(256, 1.0));
}

TEST(Delta, SpecialValuesMatchClosedForms) {
  const Real tol = pow2(-kP + 16, kP);
  const Complex d_rho = delta(HalfPlanePoint::rho(kP), kP);
  const Real cf_rho = delta_rho_closed_form(kP);
  EXPECT_LE(abs(d_rho.re - cf_rho) / abs(cf_rho), tol);
  EXPECT_LE(abs(d_rho.im) / abs(cf_rho), tol);

  const Complex d_i = delta(HalfPlanePoint::i(kP), kP);
  const Real cf_i = delta_i_closed_form(kP);
  EXPECT_LE(abs(d_i.re - cf_i) / cf_i, tol);
  EXPECT_LT(abs(delta_i_from_lemniscate(kP) - cf_i).to_double(), 1e-30);
}

TEST(Delta, LemniscateIntegralValue) {
  // Gamma(1/4)^2 / (4 sqrt(2 pi))
  const Precision p = 200;
  const Real g = gamma(Real(1L, p) / 4L);
  const Real expected = g * g / (sqrt(pi(p) * 2L) * 4L);
  EXPECT_LT(abs(lemniscate_integral(p) - expected).to_double(), 1e-55);
}

TEST(Delta, AgreesWithDirectProduct) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const auto tau = random_point(rng, 128);
    const Complex ours = delta(tau, 128);
    // Direct product is only used where it converges quickly.
    const auto reduced = reduce_to_F(tau).point;
    const Complex at_reduced = delta(reduced, 128);
    const Complex direct = delta_by_product(reduced, 400, 160);
    EXPECT_LT(rel_err(at_reduced, direct).to_double(), 1e-30);
    EXPECT_TRUE(ours.re.is_finite());
  }
}

TEST(JValue, ClassicalValues) {
  EXPECT_LT(abs(j_value(HalfPlanePoint::i(kP), kP) - Complex(Real(1728L, kP), Real(kP))).to_double(), 1e-60);
  const auto two_i = HalfPlanePoint::imaginary(Real(2L, kP));
  EXPECT_LT(abs(j_value(two_i, kP) - Complex(Real(287496L, kP), Real(kP))).to_double(), 1e-55);
  EXPECT_LE(abs(j_value(HalfPlanePoint::rho(kP), kP)), pow2(-kP + 16, kP));
}

TEST(JValue, MatchesIntegerExpansionAtRandomPoints) {
  const auto coeffs = j_coefficients(80);
  EXPECT_EQ(coeffs[0], 1);
  EXPECT_EQ(coeffs[1], 744);
  EXPECT_EQ(coeffs[2], 196884);
  EXPECT_EQ(coeffs[3], 21493760);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(1.2, 3.0);
  for (int k = 0; k < 20; ++k) {
    const HalfPlanePoint tau(Real(re(rng), 200), Real(im(rng), 200));
    const Complex ours = j_value(tau, 200);
    const Complex oracle = j_by_expansion(tau, coeffs, 200);
    EXPECT_LT(rel_err(ours, oracle).to_double(), 1e-50) << k;
    // The fast theta-only path and E4^3 / Delta with the pentagonal Delta agree.
    const Complex slow = modular_values_near_cusp(tau, 200).j;
    EXPECT_LT(rel_err(ours, slow).to_double(), 1e-55) << k;
  }
}

TEST(JValue, SL2Invariance) {
  std::mt19937_64 rng(2024);
  const Precision p = 192;
  const Real tol = pow2(-p / 2, p);
  for (int k = 0; k < 100; ++k) {
    const auto tau = random_point(rng, p + 64);
    const auto g = random_sl2(rng, 50);
    const Complex j1 = j_value(tau, p);
    const Complex j2 = j_value(g.apply(tau), p);
    ASSERT_LE(abs(j1 - j2), tol * max(Real(1L, p), abs(j1))) << k;
  }
}

TEST(Delta, WeightTwelveAndInvariantCombination) {
  std::mt19937_64 rng(99);
  const Precision p = 192;
  const Real tol = pow2(-p / 2, p);
  for (int k = 0; k < 50; ++k) {
    const auto tau = random_point(rng, p + 64);
    const auto g = random_sl2(rng, 50);
    const Complex factor = g.automorphy_factor(tau);
    const Complex lhs = delta(g.apply(tau), p);
    const Complex rhs = pow(factor, 12) * delta(tau, p);
    const Real scale = abs(delta(tau, p)) * pow(abs(factor), 12);
    ASSERT_LE(abs(lhs - rhs), tol * scale) << k;
    const Real inv1 = log_delta_im6(tau, p);
    const Real inv2 = log_delta_im6(g.apply(tau), p);
    ASSERT_LT(abs(inv1 - inv2).to_double(), 1e-40) << k;
  }
}

TEST(Evaluation, PrecisionDoublingIsStable) {
  std::mt19937_64 rng(5);
  const Precision p = 160;
  const Real tol = pow2(-p / 2, p);
  for (int k = 0; k < 20; ++k) {
    const auto tau = random_point(rng, 2 * p);
    const Complex j1 = j_value(tau, p), j2 = j_value(tau, 2 * p);
    ASSERT_LE(abs(j1 - j2), tol * max(Real(1L, p), abs(j2)));
    const Complex d1 = delta(tau, p), d2 = delta(tau, 2 * p);
    ASSERT_LE(abs(d1 - d2), tol * abs(d2));
    ASSERT_LE(abs(f_of(tau, p) - f_of(tau, 2 * p)), tol);
  }
}

TEST(FOf, SpecialPoints) {
  const Real fi = f_of(HalfPlanePoint::i(kP), kP);
  EXPECT_LT(abs(fi - f_i_closed_form(kP)).to_double(), 1e-60);
  EXPECT_LT(fi.to_double(), 1.1266);
  // f(rho) = log|Delta(rho)| since j(rho) = 0
  const Real frho = f_of(HalfPlanePoint::rho(kP), kP);
  EXPECT_LT(abs(frho - log(abs(delta_rho_closed_form(kP)))).to_double(), 1e-60);
  EXPECT_NEAR(frho.to_double(), -5.33807, 1e-5);
  const Real f100 = f_of(HalfPlanePoint::imaginary(Real(100L, 1024)), 1024);
  EXPECT_LT(abs(f100).to_double(), 1e-250);
}

TEST(FOf, CuspNeighbourhoodBound) {
  // For y in [1, 1.2536]: -log(|Delta(iy)| y^6) <= 6.5296, and j runs from 1728 to about 3456.
  const Precision p = 128;
  Real worst(-1000L, p);
  for (int k = 0; k <= 2000; ++k) {
    const Real y = Real(1L, p) + Real(0.2536, p) * Real(static_cast<long>(k), p) / 2000L;
    worst = max(worst, -log_delta_im6(HalfPlanePoint::imaginary(y), p));
  }
  EXPECT_LE(worst.to_double(), 6.5296);
  const Real j_top = j_value(HalfPlanePoint::imaginary(Real(1.2536, p)), p).re;
  EXPECT_NEAR(j_top.to_double(), 3456.0, 5.0);
}

TEST(InverseJ, ExamplesAndRoundTrip) {
  const auto at_zero = inverse_j_real(Real(0L, kP), kP);
  EXPECT_EQ(at_zero.re(), HalfPlanePoint::rho(kP).re());
  EXPECT_EQ(at_zero.im(), HalfPlanePoint::rho(kP).im());
  const auto at_1728 = inverse_j_real(Real(1728L, kP), kP);
  EXPECT_TRUE(at_1728.re().is_zero());
  EXPECT_EQ(at_1728.im(), 1L);
  const auto two = inverse_j_real(Real(287496L, kP), kP);
  EXPECT_LT(abs(two.im() - 2L).to_double(), 1e-60);

  const Real tol = pow2(-kP / 2, kP);
  for (long j0 : {-1000000L, -3375L, -1L, 1L, 1000L, 1727L, 1729L, 8000L, 54000L, 10000000L}) {
    const Real target(j0, kP);
    const auto tau = inverse_j_real(target, kP);
    const Complex j = j_value(tau, kP);
    EXPECT_LE(abs(j - Complex(target, Real(kP))), tol * max(Real(1L, kP), abs(target))) << j0;
  }
}

TEST(Contour, ExtremaAtDensityOneThousand) {
  const auto c = contour_extrema(1000, 96);
  EXPECT_NEAR(c.max.to_double(), 1.1266, 5e-4);
  EXPECT_LT(c.max.to_double(), 1.1266);
  EXPECT_NEAR(c.min.to_double(), -5.5335, 5e-4);
  EXPECT_GT(c.min.to_double(), -5.5335);
  EXPECT_LT(abs(c.argmax.re()).to_double(), 1e-8);
  EXPECT_NEAR(c.argmax.im().to_double(), 1.0, 1e-8);
  EXPECT_NEAR(c.argmin.re().to_double(), 0.5, 1e-8);
  // on |j| = 1
  EXPECT_NEAR(abs(j_value(c.argmin, 96)).to_double(), 1.0, 1e-6);
  EXPECT_THROW(contour_extrema(999, 96), std::invalid_argument);
}
