#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "modpoly/isogeny.hpp"

using namespace modpoly;

namespace {

constexpr Precision kP = 128;

// Oracle: every reduced fraction h/k with 1 <= h <= k <= M, by brute force.
std::set<std::pair<std::uint64_t, std::uint64_t>> farey_brute(std::uint64_t m) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t k = 1; k <= m; ++k)
    for (std::uint64_t h = 1; h <= k; ++h)
      if (std::gcd(h, k) == 1) out.emplace(h, k);
  return out;
}

mpq_class q(long num, long den) {
  mpq_class v(num, den);
  v.canonicalize();
  return v;
}

const std::vector<mpq_class> kHeights{q(1, 1), q(11, 10), q(12536, 10000)};

}  // namespace

TEST(Farey, SmallOrders) {
  const auto one = farey_intervals(1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].lo, q(1, 2));
  EXPECT_EQ(one[0].hi, q(3, 2));

  const auto two = farey_intervals(2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].center(), q(1, 2));
  EXPECT_EQ(two[0].lo, q(1, 3));
  EXPECT_EQ(two[0].hi, q(2, 3));
  EXPECT_EQ(two[1].lo, q(2, 3));
  EXPECT_EQ(two[1].hi, q(4, 3));
}

TEST(Farey, PartitionAndInequalitiesUpTo100) {
  for (std::uint64_t m = 1; m <= 100; ++m) {
    const auto ivs = farey_intervals(m);
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    ASSERT_EQ(ivs.front().lo, q(1, static_cast<long>(m + 1)));
    ASSERT_EQ(ivs.back().hi, q(static_cast<long>(m + 2), static_cast<long>(m + 1)));
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const auto& iv = ivs[i];
      seen.emplace(iv.h, iv.k);
      ASSERT_EQ(std::gcd(iv.h, iv.k), 1u);
      ASSERT_TRUE(1 <= iv.h && iv.h <= iv.k && iv.k <= m);
      ASSERT_TRUE(iv.contains(iv.center()));
      const mpq_class lower = q(1, static_cast<long>(2 * m * iv.k));
      const mpq_class upper = q(1, static_cast<long>((m + 1) * iv.k));
      ASSERT_LE(lower, iv.center() - iv.lo) << m;
      ASSERT_LE(iv.center() - iv.lo, upper) << m;
      ASSERT_LE(lower, iv.hi - iv.center()) << m;
      ASSERT_LE(iv.hi - iv.center(), upper) << m;
      if (i > 0) ASSERT_EQ(ivs[i - 1].hi, iv.lo);  // contiguous and disjoint
    }
    ASSERT_EQ(seen, farey_brute(m));
  }
}

TEST(Farey, Locate) {
  const auto ivs = farey_intervals(50);
  EXPECT_EQ(locate(ivs, q(1, 51)).k, 50u);
  EXPECT_EQ(locate(ivs, q(1, 1)).k, 1u);
  EXPECT_THROW(locate(ivs, q(1, 52)), std::out_of_range);
  EXPECT_THROW(locate(ivs, q(52, 51)), std::out_of_range);
}

TEST(Orbit, Examples) {
  const auto two = build_exact_orbit(2, RationalPoint{0, 3});
  ASSERT_EQ(two.size(), 3u);
  EXPECT_EQ(two[0].tau_gamma, (RationalPoint{0, 6}));
  EXPECT_EQ(two[1].tau_gamma, (RationalPoint{0, q(3, 2)}));
  EXPECT_EQ(two[2].tau_gamma, (RationalPoint{q(1, 2), q(3, 2)}));
  for (const auto& p : two) EXPECT_EQ(p.tau_reduced, p.tau_gamma);

  EXPECT_EQ(build_exact_orbit(4, RationalPoint{0, 1}).size(), 6u);
  EXPECT_EQ(build_orbit(1, HalfPlanePoint::i(kP), kP).points.size(), 1u);
}

TEST(Orbit, ImaginaryPartsScaleByAOverD) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.9, 3.0);
  for (std::uint64_t n : {6, 12, 35}) {
    const HalfPlanePoint tau(Real(re(rng), kP), Real(im(rng), kP));
    const auto orbit = build_orbit(n, tau, kP);
    ASSERT_EQ(orbit.points.size(), psi(factor(n)));
    for (const auto& p : orbit.points) {
      const Real expected = tau.im() * static_cast<long>(p.gamma.a) / static_cast<long>(p.gamma.d);
      ASSERT_LT(abs(p.tau_gamma.im() - expected).to_double(), 1e-35);
      ASSERT_GE(p.tau_reduced.im(), p.tau_gamma.im() * Real(1.0 - 1e-30, kP));
    }
  }
}

TEST(SN, SingleTermAndClosedFormForTwo) {
  const auto tau = HalfPlanePoint::imaginary(Real(1.3, kP));
  const Real j = abs(j_value(tau, kP));
  EXPECT_LT(abs(s_n(1, tau, kP) - log(j)).to_double(), 1e-30);

  // Orbit of i under C_2 reduces to {2i, 2i, i}: S_2(i) = 2 log 287496 + log 1728.
  const Real expected = log(Real(287496L, kP)) * 2L + log(Real(1728L, kP));
  EXPECT_LT(abs(s_n(2, HalfPlanePoint::i(kP), kP) - expected).to_double(), 1e-30);
}

TEST(SN, DecompositionIdentity) {
  const auto r1 = sn_decomposition_check(1, HalfPlanePoint::imaginary(Real(2L, kP)), kP);
  EXPECT_TRUE(r1.pass);
  const auto r2 = sn_decomposition_check(2, HalfPlanePoint::i(kP), kP);
  EXPECT_LT(abs(r2.lhs - r2.rhs).to_double(), 1e-20);
  const auto r30 = sn_decomposition_check(30, HalfPlanePoint::imaginary(Real::from_string("1.0001", kP)), kP);
  EXPECT_LT(abs(r30.lhs - r30.rhs).to_double(), 1e-15);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.87, 2.0);
  for (std::uint64_t n : {3, 7, 24}) {
    const auto rep = sn_decomposition_check(n, HalfPlanePoint(Real(re(rng), kP), Real(im(rng), kP)), kP);
    EXPECT_TRUE(rep.pass) << n << " " << rep.margin.to_string(5);
  }
}

TEST(HatTau, OrderIsExactFloor) {
  // d / sqrt(N y) = 12 / sqrt(36) = 2 exactly
  EXPECT_EQ(hat_tau_order(36, q(1, 1), 12), 2u);
  EXPECT_EQ(hat_tau_order(36, q(101, 100), 12), 1u);
  EXPECT_EQ(hat_tau_order(2, q(1, 1), 1), 0u);
  EXPECT_THROW(hat_tau(2, q(1, 1), IsogenyMatrix{2, 0, 1}), std::invalid_argument);
}

TEST(HatTau, LemmaEstimatesHoldExactly) {
  for (std::uint64_t n = 1; n <= 100; ++n) {
    for (const auto& y : {q(1, 1), q(12536, 10000)}) {
      const mpq_class ny = mpq_class(static_cast<unsigned long>(n)) * y;
      for (const auto& g : enumerate_CN(n)) {
        if (mpq_class(static_cast<unsigned long>(g.d * g.d)) < ny) continue;
        const HatTau ht = hat_tau(n, y, g);
        const mpq_class x(static_cast<unsigned long>(ht.gamma.b), static_cast<unsigned long>(ht.gamma.d));
        ASSERT_TRUE(locate(farey_intervals(ht.m), mpq_class(x)).center() == mpq_class(ht.h, ht.k));
        ASSERT_EQ(ht.delta.m21(), static_cast<std::int64_t>(ht.k));
        ASSERT_EQ(ht.delta.m22(), -static_cast<std::int64_t>(ht.h));
        ASSERT_GT(ht.tau_hat.re, q(-1, 2));
        ASSERT_LE(ht.tau_hat.re, q(1, 2));
        // same SL2(Z) orbit as tau_gamma
        ASSERT_EQ(reduce_to_F(ht.tau_hat).point, ht.tau_reduced);
        // (a) Im >= 1/2, (b) Im <= d^2 / (N y k^2), (c) Im tilde <= 4 Im hat
        ASSERT_GE(ht.tau_hat.im, q(1, 2)) << n;
        const mpq_class kk(static_cast<unsigned long>(ht.k * ht.k));
        ASSERT_LE(ht.tau_hat.im, mpq_class(static_cast<unsigned long>(g.d * g.d)) / (ny * kk)) << n;
        ASSERT_LE(ht.tau_reduced.im, 4 * ht.tau_hat.im) << n;
      }
    }
  }
}

TEST(HatTau, RemarkInequalityEmpirically) {
  // 2d / ((M+1) k r) >= 1 for 1 <= k <= M, checked at k = M where it is tightest.
  for (std::uint64_t n = 1; n <= 500; ++n) {
    for (const auto& y : kHeights) {
      const mpq_class ny = mpq_class(static_cast<unsigned long>(n)) * y;
      for (std::uint64_t d : divisors(factor(n))) {
        if (mpq_class(static_cast<unsigned long>(d * d)) < ny) continue;
        const std::uint64_t m = hat_tau_order(n, y, d);
        const std::uint64_t r = std::gcd(d, n / d);
        ASSERT_GE(2 * d, (m + 1) * m * r) << n << " " << d;
      }
    }
  }
}

TEST(LogImSums, Examples) {
  const auto l1 = large_d_sum(1, q(1, 1), kP);
  EXPECT_TRUE(l1.value.is_zero());
  EXPECT_EQ(l1.terms, 1u);
  EXPECT_LE(large_d_sum(50, q(1, 1), kP).value, large_d_sum(50, q(1, 1), kP).bound);
  const auto l199 = large_d_sum(199, q(12536, 10000), kP);
  EXPECT_LE(l199.value, l199.bound);

  const auto s1 = small_d_sum(1, q(2, 1), kP);
  EXPECT_LT(abs(s1.value - log(Real(2L, kP))).to_double(), 1e-30);
  EXPECT_LE(s1.value, s1.bound);
  for (const auto& [n, y] : std::vector<std::pair<std::uint64_t, mpq_class>>{{12, q(1, 1)}, {360, q(11, 10)}}) {
    const auto s = small_d_sum(n, y, kP);
    EXPECT_LE(s.value, s.bound) << n;
    EXPECT_EQ(s.terms + large_d_sum(n, y, kP).terms, psi(factor(n)));
  }
}

TEST(LogImSums, LemmasForAllNUpTo200) {
  for (std::uint64_t n = 1; n <= 200; ++n) {
    for (const auto& y : kHeights) {
      const auto large = large_d_sum(n, y, kP);
      const auto small = small_d_sum(n, y, kP);
      ASSERT_LE(large.value, large.bound) << n;
      ASSERT_LE(small.value, small.bound) << n;
    }
  }
}

TEST(MeanLogIm, PropositionExamples) {
  const Real two = mean_log_im(2, HalfPlanePoint::imaginary(Real(3L, kP)), kP);
  EXPECT_LT(abs(two - log(Real(13.5, kP)) / 3L).to_double(), 1e-30);

  for (const auto& [n, y] : std::vector<std::pair<std::uint64_t, long>>{{2, 3}, {5, 10}, {12, 20}}) {
    const auto f = factor(n);
    const auto lhs = sum_log_im_exact(n, RationalPoint{0, y});
    LogPrimeVector rhs = LogPrimeVector::log_of(static_cast<std::uint64_t>(y)) - LogPrimeVector::log_of(n) +
                         lambda_vector(f) * mpq_class(2);
    rhs *= mpq_class(static_cast<unsigned long>(psi(f)));
    EXPECT_EQ(lhs, rhs) << n;
  }

  // (a) sandwich for N = 30 at tau = i
  const auto f30 = factor(30);
  const Real mean = mean_log_im(30, HalfPlanePoint::i(kP), kP);
  const Real lower =
      max(log(sqrt(Real(3L, kP)) / 2L), -log(Real(30L, kP)) + lambda_vector(f30).evaluate(kP) * 2L);
  EXPECT_LE(lower, mean);
  EXPECT_LE(mean, Real(10.832, kP));
}
