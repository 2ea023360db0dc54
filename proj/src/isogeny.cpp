#include "modpoly/isogeny.hpp"

#include <algorithm>
#include <stdexcept>

namespace modpoly {

namespace {

constexpr Precision kGuard = 32;

Real log_max_one_abs(const Complex& z, Precision bits) {
  // log max{1, |z|} = max{0, log(|z|^2) / 2}
  Real n = norm(z);
  if (n <= 1L) return Real(bits);
  Real l = log(n.with_precision(bits + 8));
  l /= 2L;
  return l.with_precision(bits);
}

Real log_abs(const Complex& z, Precision bits) {
  Real l = log(norm(z).with_precision(bits + 8));
  l /= 2L;
  return l.with_precision(bits);
}

mpq_class canonical(mpq_class q) {
  q.canonicalize();
  return q;
}

RationalPoint orbit_point(const IsogenyMatrix& g, const RationalPoint& tau) {
  const mpq_class a(static_cast<unsigned long>(g.a)), b(static_cast<unsigned long>(g.b));
  const mpq_class d(static_cast<unsigned long>(g.d));
  return RationalPoint{canonical((a * tau.re + b) / d), canonical(a * tau.im / d)};
}

// u h + v k = 1 for coprime h, k >= 1.
std::pair<mpz_class, mpz_class> bezout(std::uint64_t h, std::uint64_t k) {
  mpz_class g, u, v;
  mpz_gcdext(g.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), mpz_class(static_cast<unsigned long>(h)).get_mpz_t(),
             mpz_class(static_cast<unsigned long>(k)).get_mpz_t());
  if (g != 1) throw std::logic_error("Farey fraction not in lowest terms");
  return {u, v};
}

std::int64_t small(const mpz_class& v) {
  if (!v.fits_slong_p()) throw std::overflow_error("matrix entry exceeds 64 bits");
  return v.get_si();
}

}  // namespace

// ---------------------------------------------------------------------------
// Farey intervals

std::vector<FareyInterval> farey_intervals(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("Farey order must be positive");
  // Farey sequence of order m on [0, 1] by the next-term recurrence, then the
  // successor (m+1)/m of 1/1 in the sequence continued past 1.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seq{{0, 1}};
  std::uint64_t a = 0, b = 1, c = 1, d = m;
  while (c <= m) {
    seq.emplace_back(c, d);
    if (c == d) break;
    const std::uint64_t t = (m + b) / d;
    const std::uint64_t e = t * c - a, f = t * d - b;
    a = c;
    b = d;
    c = e;
    d = f;
  }
  seq.emplace_back(m + 1, m);

  std::vector<FareyInterval> out;
  out.reserve(seq.size() - 2);
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    const auto [h, k] = seq[i];
    const auto [hl, kl] = seq[i - 1];
    const auto [hr, kr] = seq[i + 1];
    out.push_back(FareyInterval{h, k, mpq_class(canonical(mpq_class(h + hl, k + kl))),
                                mpq_class(canonical(mpq_class(h + hr, k + kr)))});
  }
  return out;
}

const FareyInterval& locate(const std::vector<FareyInterval>& intervals, const mpq_class& x) {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), x,
                             [](const mpq_class& v, const FareyInterval& iv) { return v < iv.lo; });
  if (it == intervals.begin()) throw std::out_of_range("point below the Farey intervals");
  --it;
  if (!it->contains(x)) throw std::out_of_range("point above the Farey intervals");
  return *it;
}

// ---------------------------------------------------------------------------
// Orbits

HeckeOrbit build_orbit(std::uint64_t n, const HalfPlanePoint& tau, Precision bits) {
  const Precision w = bits + kGuard;
  const Real x = tau.re().with_precision(w), y = tau.im().with_precision(w);
  HeckeOrbit orbit{n, tau, {}};
  const auto cn = enumerate_CN(n);
  orbit.points.reserve(cn.size());
  for (const auto& g : cn) {
    const long a = static_cast<long>(g.a), b = static_cast<long>(g.b), d = static_cast<long>(g.d);
    HalfPlanePoint tg((x * a + Real(b, w)) / d, y * a / d);
    Reduction r = reduce_to_F(tg);
    orbit.points.push_back(OrbitPoint{g, std::move(tg), std::move(r.point), r.transform});
  }
  return orbit;
}

std::vector<ExactOrbitPoint> build_exact_orbit(std::uint64_t n, const RationalPoint& tau) {
  std::vector<ExactOrbitPoint> out;
  const auto cn = enumerate_CN(n);
  out.reserve(cn.size());
  for (const auto& g : cn) {
    RationalPoint tg = orbit_point(g, tau);
    RationalReduction r = reduce_to_F(tg);
    out.push_back(ExactOrbitPoint{g, std::move(tg), std::move(r.point), r.transform});
  }
  return out;
}

Real s_n(const HeckeOrbit& orbit, Precision bits) {
  Real sum(bits + 16);
  for (const auto& p : orbit.points) sum += log_max_one_abs(j_near_cusp(p.tau_reduced, bits + 16), bits + 16);
  return sum.with_precision(bits);
}

Real s_n(std::uint64_t n, const HalfPlanePoint& tau, Precision bits) { return s_n(build_orbit(n, tau, bits), bits); }

BoundReport sn_decomposition_check(std::uint64_t n, const HalfPlanePoint& tau, Precision bits) {
  const Precision w = bits + 16;
  const HeckeOrbit orbit = build_orbit(n, tau, bits);
  const Real lhs = s_n(orbit, w);

  Real max_terms(w), im_terms(w);
  for (const auto& p : orbit.points) {
    const ModularValues mv = modular_values_near_cusp(p.tau_reduced, w);
    const Real log_delta = log_abs(mv.delta, w);
    const Real log_j_delta = log_abs(mv.j, w) + log_delta;
    max_terms += max(log_delta, log_j_delta);
    im_terms += log(p.tau_reduced.im().with_precision(w)) - log(p.tau_gamma.im().with_precision(w));
  }
  const std::uint64_t psi_n = orbit.points.size();
  Real rhs = max_terms + im_terms * 6L;
  rhs -= log_abs(delta(tau, w), w) * static_cast<long>(psi_n);

  return make_report("sn_decomposition", n, lhs, rhs, Claim::equal, bits,
                     {{"tau", tau.re().to_string(12) + " + i " + tau.im().to_string(12)}});
}

// ---------------------------------------------------------------------------
// Hat-tau and the log Im sums

std::uint64_t hat_tau_order(std::uint64_t n, const mpq_class& y, std::uint64_t d) {
  // M = floor(sqrt(d^2 / (N y))) = isqrt(floor(d^2 / (N y)))
  const mpq_class ratio = canonical(mpq_class(mpz_class(static_cast<unsigned long>(d)) * d) /
                                    (mpq_class(static_cast<unsigned long>(n)) * y));
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), fl.get_mpz_t());
  return root.get_ui();
}

HatTau hat_tau(std::uint64_t n, const mpq_class& y, const IsogenyMatrix& gamma) {
  if (y < 1) throw std::invalid_argument("hat_tau needs y >= 1");
  const std::uint64_t m = hat_tau_order(n, y, gamma.d);
  if (m < 1) throw std::invalid_argument("hat_tau needs d >= sqrt(N y)");

  IsogenyMatrix g = gamma;
  const mpq_class frac = canonical(mpq_class(static_cast<unsigned long>(g.b), static_cast<unsigned long>(g.d)));
  if (frac < mpq_class(1, static_cast<unsigned long>(m + 1))) g.b += g.d;
  const mpq_class x = canonical(mpq_class(static_cast<unsigned long>(g.b), static_cast<unsigned long>(g.d)));

  const auto intervals = farey_intervals(m);
  const FareyInterval& iv = locate(intervals, x);
  const std::uint64_t h = iv.h, k = iv.k;

  // s h + r k = -1 with |s| minimal: s = -u + t k for u h + v k = 1.
  const auto [u, v] = bezout(h, k);
  const mpz_class kz(static_cast<unsigned long>(k)), hz(static_cast<unsigned long>(h));
  mpz_class t;
  {
    // nearest integer to u / k
    mpz_class twice = 2 * u + kz;
    mpz_fdiv_q(t.get_mpz_t(), twice.get_mpz_t(), mpz_class(2 * kz).get_mpz_t());
  }
  const mpz_class s = -u + t * kz;
  const mpz_class r_num = -1 - s * hz;
  if (r_num % kz != 0) throw std::logic_error("Bezout normalization failed");
  const mpz_class r = r_num / kz;
  UnimodularMatrix delta(small(s), small(r), small(kz), -small(hz));

  const RationalPoint tg = orbit_point(g, RationalPoint{0, y});
  RationalPoint th = delta.apply(tg);
  // translate Re into (-1/2, 1/2]
  const mpq_class shifted = th.re - mpq_class(1, 2);
  mpz_class shift;
  mpz_cdiv_q(shift.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  if (shift != 0) {
    const auto tr = UnimodularMatrix::T(-small(shift));
    delta = tr * delta;
    th = tr.apply(th);
  }
  RationalPoint reduced = reduce_to_F(tg).point;
  return HatTau{g, m, h, k, delta, tg, th, std::move(reduced)};
}

namespace {

SumAndBound log_im_sum(std::uint64_t n, const mpq_class& y, Precision bits, bool large) {
  const mpq_class ny = mpq_class(static_cast<unsigned long>(n)) * y;
  Real sum(bits + 16);
  std::size_t terms = 0;
  for (const auto& g : enumerate_CN(n)) {
    const mpq_class d2(mpz_class(static_cast<unsigned long>(g.d)) * g.d);
    if ((d2 >= ny) != large) continue;
    const RationalPoint tg = orbit_point(g, RationalPoint{0, y});
    const RationalPoint reduced = reduce_to_F(tg).point;
    sum += log(Real(reduced.im, bits + 16));
    ++terms;
  }
  return SumAndBound{sum.with_precision(bits), Real(bits), terms};
}

}  // namespace

SumAndBound large_d_sum(std::uint64_t n, const mpq_class& y, Precision bits) {
  if (y < 1) throw std::invalid_argument("large_d_sum needs y >= 1");
  SumAndBound out = log_im_sum(n, y, bits, true);
  const Precision w = bits + 16;
  const Real log2v = log(Real(2L, w));
  const Real coefficient = Real(4.75, w) + log2v * Real(3.5, w) +
                           (Real(0.5, w) + log2v) / (sqrt(Real(static_cast<long>(n), w)) * 2L);
  out.bound = (coefficient * static_cast<long>(psi(factor(n)))).with_precision(bits);
  return out;
}

SumAndBound small_d_sum(std::uint64_t n, const mpq_class& y, Precision bits) {
  if (y < 1) throw std::invalid_argument("small_d_sum needs y >= 1");
  SumAndBound out = log_im_sum(n, y, bits, false);
  const Precision w = bits + 16;
  const Real inv_e = Real(1L, w) / euler_e(w);
  out.bound = ((inv_e + log(Real(y, w))) * static_cast<long>(psi(factor(n)))).with_precision(bits);
  return out;
}

Real mean_log_im(std::uint64_t n, const HalfPlanePoint& tau, Precision bits) {
  const HeckeOrbit orbit = build_orbit(n, tau, bits);
  Real sum(bits + 16);
  for (const auto& p : orbit.points) sum += log(p.tau_reduced.im().with_precision(bits + 16));
  return (sum / static_cast<long>(orbit.points.size())).with_precision(bits);
}

LogPrimeVector sum_log_im_exact(std::uint64_t n, const RationalPoint& tau) {
  LogPrimeVector sum;
  for (const auto& p : build_exact_orbit(n, tau)) sum += LogPrimeVector::log_of(p.tau_reduced.im);
  return sum;
}

}  // namespace modpoly
