#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "modpoly/arithfun.hpp"
#include "modpoly/engine.hpp"
#include "modpoly/isogeny.hpp"
#include "modpoly/mahler.hpp"

using namespace modpoly;

namespace {

mpz_class z(const char* s) { return mpz_class(s); }

// Random tau in F with Im tau in [sqrt(3)/2 + 0.01, 1.6]; the Y-node range of
// the engine is disjoint from these points except by accident.
std::vector<HalfPlanePoint> random_points(std::uint64_t seed, int count, Precision bits) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> num(-4999, 5000);
  std::uniform_int_distribution<long> ims(0, 10000);
  std::vector<HalfPlanePoint> out;
  while (static_cast<int>(out.size()) < count) {
    const mpq_class re(num(rng), 10000);
    const mpq_class im = mpq_class(876, 1000) + mpq_class(ims(rng), 10000) * mpq_class(724, 1000);
    if (re * re + im * im < 1) continue;
    out.push_back(HalfPlanePoint::from_rational(re, im, bits));
  }
  return out;
}

Real theorem_rhs(std::uint64_t n, double constant, Precision bits) {
  const auto f = factor(n);
  const Real base = log_of(mpz_class(static_cast<unsigned long>(n)), bits) - 2L * lambda_vector(f).evaluate(bits);
  return 6L * static_cast<long>(psi(f)) * (base + Real(constant, bits));
}

}  // namespace

TEST(Engine, PhiOneIsXMinusY) {
  const ModularPolynomial phi = compute_phi(1);
  ASSERT_EQ(phi.degree(), 1u);
  EXPECT_EQ(phi.coeffs[1][0], 1);
  EXPECT_EQ(phi.coeffs[0][1], -1);
  EXPECT_EQ(phi.coeffs[0][0], 0);
  EXPECT_EQ(phi.coeffs[1][1], 0);
  EXPECT_TRUE(phi.is_monic_in_x());
  EXPECT_TRUE(height(phi).value.is_zero());
  EXPECT_EQ(specialize_y(phi, 0), (std::vector<mpz_class>{0, 1}));
}

TEST(Engine, PhiTwoAgainstDoubledPrecisionAndVanishing) {
  const ModularPolynomial phi = compute_phi(2);
  ASSERT_EQ(phi.degree(), 3u);
  EXPECT_TRUE(phi.is_symmetric());
  EXPECT_TRUE(phi.is_monic_in_x());
  EXPECT_LT(phi.residual, pow2(-32, 64));
  EXPECT_EQ(phi.coeffs[0][0], z("-157464000000000"));

  // Oracle: the same matrix at twice the precision, and the vanishing invariant.
  const ModularPolynomial doubled = compute_phi_at(2, 2 * phi.precision_used);
  EXPECT_LT(doubled.residual, pow2(-32, 64));
  EXPECT_EQ(phi, doubled);
  for (const auto& tau : random_points(2, 10, 256))
    EXPECT_LT(vanishing_ratio(phi, tau, 256), pow2(-32, 64)) << tau.re().to_string() << " " << tau.im().to_string();

  const HeightValue h = height(phi);
  EXPECT_LT(abs(h.value - log_of(z("157464000000000"), 128)).to_double(), 1e-30);
  EXPECT_EQ(h.i, 0u);
  EXPECT_EQ(h.j, 0u);
}

TEST(Engine, SpecializeTwoAtZero) {
  const ModularPolynomial phi = compute_phi(2);
  const std::vector<mpz_class> expected{z("-157464000000000"), z("8748000000"), -162000, 1};
  EXPECT_EQ(specialize_y(phi, 0), expected);
}

TEST(Engine, PhiThreeWithinHeightBoundsAtTwoPrecisions) {
  const ModularPolynomial phi = compute_phi(3);
  const ModularPolynomial wider = compute_phi_at(3, phi.precision_used * 3 / 2);
  EXPECT_EQ(phi, wider);
  const Real h = height(phi).value;
  EXPECT_GT(h, theorem_rhs(3, -0.0351, 128));
  EXPECT_LT(h, theorem_rhs(3, 9.5387, 128));
}

TEST(Engine, SmallLevelInvariants) {
  for (std::uint64_t n : {4u, 5u, 6u, 7u, 9u, 11u}) {
    const ModularPolynomial phi = compute_phi(n);
    EXPECT_EQ(phi.degree(), psi(factor(n))) << n;
    EXPECT_TRUE(phi.is_symmetric()) << n;
    EXPECT_TRUE(phi.is_monic_in_x()) << n;
    EXPECT_LT(phi.residual, pow2(-32, 64)) << n;
    EXPECT_LT(phi.asymmetry, 2L * phi.residual + pow2(-1000, 64)) << n;
    // monic in Y follows from symmetry; check it on the matrix directly
    EXPECT_EQ(phi.coeffs[0][phi.degree()], 1) << n;
    for (const auto& tau : random_points(n, 5, 256)) EXPECT_LT(vanishing_ratio(phi, tau, 256), pow2(-32, 64)) << n;
  }
}

TEST(Engine, ThreadedResultIsIdentical) {
  EngineConfig threaded;
  threaded.jobs = 3;
  EXPECT_EQ(compute_phi(10, phi_policy(10), threaded), compute_phi(10));
}

TEST(Engine, RootsAtI) {
  // Phi_N(X, 1728) vanishes exactly at j(tau_gamma) for tau = i, with multiplicity.
  constexpr Precision kP = 256;
  for (std::uint64_t n : {2u, 5u, 6u}) {
    const ModularPolynomial phi = compute_phi(n);
    const HeckeOrbit orbit = build_orbit(n, HalfPlanePoint::i(kP), kP);
    std::vector<Complex> targets;
    for (const auto& pt : orbit.points) targets.push_back(j_value(pt.tau_reduced, kP));

    std::size_t matched = 0;
    for (const auto& sf : square_free_decomposition(specialize_y(phi, 1728))) {
      for (const auto& root : isolate_roots(sf.factor, kP)) {
        std::size_t hits = 0;
        for (const auto& t : targets) {
          const Real scale = max(abs(t), Real(1L, kP));
          if (abs(t - root.center) / scale < pow2(-kP / 4, kP)) ++hits;
        }
        EXPECT_EQ(hits, sf.multiplicity) << n;
        matched += hits;
      }
    }
    EXPECT_EQ(matched, targets.size()) << n;
  }
}

TEST(Engine, MahlerOfSpecializationMatchesOrbitSum) {
  constexpr Precision kP = 256;
  const ModularPolynomial phi = compute_phi(2);
  const Real m = mahler_measure(specialize_y(phi, 0), kP);
  const Real s = s_n(2, HalfPlanePoint::rho(kP), kP);
  EXPECT_LT(abs(m - s).to_double(), 1e-20);
  EXPECT_LE(m, log_length(specialize_y(phi, 0), kP));
}

TEST(Engine, SpecializedHeightLowerBound) {
  constexpr Precision kP = 128;
  for (std::uint64_t n = 1; n <= 8; ++n) {
    const ModularPolynomial phi = compute_phi(n);
    const long deg = static_cast<long>(phi.degree());
    for (long j0 : {0L, 1728L, 287496L}) {
      const auto spec = specialize_y(phi, j0);
      mpz_class top = 0;
      for (const auto& c : spec)
        if (abs(c) > top) top = abs(c);
      const Real lhs = log_of(top, kP);
      const Real rhs = deg * (log(max(Real(1L, kP), Real(j0, kP))) - Real(7.2095, kP));
      EXPECT_GE(lhs, rhs) << n << " " << j0;
    }
  }
}

TEST(Engine, RetryPolicyAndFailures) {
  PrecisionPolicy tight;
  tight.base_bits = 64;
  tight.max_retries = 0;
  try {
    compute_phi(7, tight);
    FAIL() << "expected PrecisionExhausted";
  } catch (const PrecisionExhausted& e) {
    EXPECT_EQ(e.n, 7u);
    EXPECT_EQ(e.last_bits, 64);
  }

  PrecisionPolicy ladder;
  ladder.base_bits = 64;
  ladder.max_retries = 6;
  EngineTimings timings;
  const ModularPolynomial phi = compute_phi(7, ladder, {}, &timings);
  EXPECT_GT(timings.attempts, 1);
  EXPECT_EQ(phi.precision_used, ladder.bits_for_attempt(timings.attempts - 1));
  EXPECT_EQ(phi, compute_phi(7));

  EngineConfig small;
  small.psi_ceiling = 10;
  EXPECT_THROW(compute_phi(12, phi_policy(12), small), std::invalid_argument);
  EXPECT_THROW(compute_phi(0), std::invalid_argument);
}

TEST(Engine, BaseBitsFormula) {
  // ceil(1.2 * 6 * 3 * (log 2 - (2/3) log 2 + 9.5387) / log 2) + 48 + 256
  const double expected = std::ceil(1.2 * 18 * (std::log(2.0) / 3 + 9.5387) / std::log(2.0)) + 48 + 256;
  EXPECT_EQ(phi_base_bits(2), static_cast<Precision>(expected));
  EXPECT_EQ(phi_policy(2).base_bits, phi_base_bits(2));
}

TEST(Phimat, RoundTrip) {
  for (std::uint64_t n : {1u, 2u, 3u, 6u}) {
    const ModularPolynomial phi = compute_phi(n);
    std::ostringstream out;
    write_phimat(out, phi);
    std::istringstream in(out.str());
    const ModularPolynomial back = read_phimat(in);
    EXPECT_EQ(back, phi) << n;
    std::ostringstream again;
    write_phimat(again, back);
    EXPECT_EQ(again.str(), out.str()) << n;
  }
}

TEST(Phimat, PhiOneLayout) {
  std::ostringstream out;
  write_phimat(out, compute_phi(1));
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("PHIMAT v1 N=1 psi=1 height_log=0.", 0), 0u);
  EXPECT_NE(text.find("\n0 1 -1\nresidual "), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Phimat, RejectsMalformedInput) {
  std::ostringstream good;
  write_phimat(good, compute_phi(2));
  const std::string text = good.str();
  const auto rejects = [](const std::string& s) {
    std::istringstream in(s);
    EXPECT_THROW(read_phimat(in), std::runtime_error) << s;
  };
  const auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = text;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  rejects("");
  rejects(replace("PHIMAT v1", "PHIMAT v2"));
  rejects(replace("psi=3", "psi=4"));
  rejects(replace("N=2", "N=3"));
  rejects(replace("height_log=32.6", "height_log=31.6"));
  rejects(replace("1 2 1488", "2 1 1488"));            // i > j
  rejects(replace("0 1 8748000000", "0 9 8748000000"));  // index out of range
  rejects(replace("0 0 -157464000000000\n", ""));      // height no longer matches
  rejects(replace("1 1 40773375", "1 1 0"));           // explicit zero entry
  rejects(replace("0 2 -162000\n0 3 1\n", "0 3 1\n0 2 -162000\n"));  // unsorted
  rejects(replace("0 0 -157464000000000", "0 0 x"));
  rejects(text.substr(0, text.find("residual")));
  rejects(text + "extra\n");
}
