#include "modpoly/mahler.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace modpoly {

namespace {

IntPoly subtract(const IntPoly& a, const IntPoly& b) {
  IntPoly out(std::max(a.size(), b.size()));
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] -= b[k];
  return normalized(std::move(out));
}

mpz_class evaluate(const IntPoly& p, const mpz_class& x) {
  mpz_class acc = 0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
  return acc;
}

mpz_class max_abs(const IntPoly& p) {
  mpz_class m = 0;
  for (const auto& c : p)
    if (cmp(abs(c), m) > 0) m = abs(c);
  return m;
}

// Coefficients of gamma in base xi with digits in (-xi/2, xi/2].
IntPoly symmetric_digits(mpz_class gamma, const mpz_class& xi) {
  IntPoly out;
  const mpz_class half = xi / 2;
  while (gamma != 0) {
    mpz_class digit;
    mpz_fdiv_r(digit.get_mpz_t(), gamma.get_mpz_t(), xi.get_mpz_t());
    if (digit > half) digit -= xi;
    out.push_back(digit);
    gamma = (gamma - digit) / xi;
  }
  return normalized(std::move(out));
}

// Pseudo-remainder of a by b: lead(b)^{deg a - deg b + 1} a mod b.
IntPoly pseudo_remainder(IntPoly a, const IntPoly& b) {
  const long db = degree_of(b);
  const mpz_class& lead = b.back();
  while (degree_of(a) >= db) {
    const long shift = degree_of(a) - db;
    const mpz_class top = a.back();
    for (auto& c : a) c *= lead;
    for (long k = 0; k <= db; ++k) a[static_cast<std::size_t>(k + shift)] -= top * b[static_cast<std::size_t>(k)];
    a = normalized(std::move(a));
  }
  return a;
}

IntPoly prs_gcd(IntPoly a, IntPoly b) {
  if (degree_of(a) < degree_of(b)) std::swap(a, b);
  while (!b.empty()) {
    IntPoly r = pseudo_remainder(a, b);
    a = std::move(b);
    b = r.empty() ? r : primitive_part(r);
  }
  return primitive_part(a);
}

IntPoly positive_lead(IntPoly p) {
  if (!p.empty() && p.back() < 0)
    for (auto& c : p) c = -c;
  return p;
}

// ---------------------------------------------------------------------------
// Aberth iteration

struct Evaluation {
  Complex value;
  Complex slope;
  Real error;  // bound on the rounding error of `value`
};

Evaluation horner(const std::vector<Real>& coeffs, const std::vector<Real>& abs_coeffs, const Complex& z,
                  Precision p) {
  const std::size_t n = coeffs.size() - 1;
  Complex v(coeffs[n], Real(p));
  Complex dv(p);
  Real magnitude = abs_coeffs[n];
  const Real r = abs(z);
  for (std::size_t k = n; k-- > 0;) {
    dv = dv * z + v;
    v = v * z;
    v.re += coeffs[k];
    magnitude = magnitude * r + abs_coeffs[k];
  }
  // Horner in floating point: |error| <= 4 n 2^{-p} sum |a_k| |z|^k (with margin).
  Real error = magnitude * pow2(-static_cast<long>(p) + 4, p) * static_cast<long>(2 * n + 2);
  return Evaluation{std::move(v), std::move(dv), std::move(error)};
}

double log_abs_mpz(const mpz_class& c) {
  long e = 0;
  const double d = mpz_get_d_2exp(&e, c.get_mpz_t());
  return std::log(std::fabs(d)) + static_cast<double>(e) * std::numbers::ln2;
}

// Starting points on circles whose radii come from the upper convex hull of
// (k, log|a_k|), one circle per hull edge with as many points as its width.
std::vector<Complex> initial_points(const IntPoly& p, Precision bits) {
  const long n = degree_of(p);
  std::vector<std::pair<long, double>> pts;
  for (long k = 0; k <= n; ++k)
    if (p[static_cast<std::size_t>(k)] != 0) pts.emplace_back(k, log_abs_mpz(p[static_cast<std::size_t>(k)]));
  std::vector<std::pair<long, double>> hull;
  for (const auto& q : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // drop b unless it lies strictly above the segment a -> q
      const double cross = (static_cast<double>(b.first - a.first)) * (q.second - a.second) -
                           (b.second - a.second) * static_cast<double>(q.first - a.first);
      if (cross >= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(q);
  }
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  const double sigma = 0.7;
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const long width = hull[e + 1].first - hull[e].first;
    const double log_radius = (hull[e].second - hull[e + 1].second) / static_cast<double>(width);
    const Real radius = exp(Real(log_radius, bits));
    for (long j = 0; j < width; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(width) +
                           2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(n) + sigma;
      out.emplace_back(radius * Real(std::cos(angle), bits), radius * Real(std::sin(angle), bits));
    }
  }
  // Zero roots come from a leading run of zero coefficients.
  while (static_cast<long>(out.size()) < n) out.emplace_back(Real(bits), Real(bits));
  return out;
}

Complex with_bits(const Complex& z, Precision p) { return Complex(z.re.with_precision(p), z.im.with_precision(p)); }

}  // namespace

// ---------------------------------------------------------------------------
// Exact arithmetic

IntPoly normalized(IntPoly p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

long degree_of(const IntPoly& p) { return static_cast<long>(normalized(p).size()) - 1; }

IntPoly derivative(const IntPoly& p) {
  IntPoly out;
  for (std::size_t k = 1; k < p.size(); ++k) out.push_back(p[k] * static_cast<unsigned long>(k));
  return normalized(std::move(out));
}

mpz_class content(const IntPoly& p) {
  mpz_class g = 0;
  for (const auto& c : p) g = gcd(g, c);
  return g;
}

IntPoly primitive_part(const IntPoly& p) {
  IntPoly q = normalized(p);
  if (q.empty()) return q;
  const mpz_class g = content(q);
  for (auto& c : q) c /= g;
  return positive_lead(std::move(q));
}

std::optional<IntPoly> divide_exact(const IntPoly& a_in, const IntPoly& b_in) {
  IntPoly a = normalized(a_in);
  const IntPoly b = normalized(b_in);
  if (b.empty()) throw std::invalid_argument("division by the zero polynomial");
  if (a.empty()) return IntPoly{};
  const long da = degree_of(a), db = degree_of(b);
  if (da < db) return std::nullopt;
  IntPoly q(static_cast<std::size_t>(da - db + 1));
  for (long i = da; i >= db; --i) {
    mpz_class& top = a[static_cast<std::size_t>(i)];
    if (top == 0) continue;
    if (!mpz_divisible_p(top.get_mpz_t(), b.back().get_mpz_t())) return std::nullopt;
    const mpz_class factor = top / b.back();
    q[static_cast<std::size_t>(i - db)] = factor;
    for (long k = 0; k <= db; ++k) a[static_cast<std::size_t>(i - db + k)] -= factor * b[static_cast<std::size_t>(k)];
  }
  if (!normalized(std::move(a)).empty()) return std::nullopt;
  return normalized(std::move(q));
}

IntPoly poly_gcd(const IntPoly& a_in, const IntPoly& b_in) {
  const IntPoly a = normalized(a_in), b = normalized(b_in);
  if (a.empty() && b.empty()) return {};
  if (a.empty()) return primitive_part(b);
  if (b.empty()) return primitive_part(a);
  if (degree_of(a) == 0 || degree_of(b) == 0) return IntPoly{1};
  const IntPoly pa = primitive_part(a), pb = primitive_part(b);

  // Heuristic gcd: evaluate at a large xi, take the integer gcd and read the
  // candidate back from its balanced base-xi digits. A candidate that divides
  // both inputs is the gcd when xi > 2 min(|a|_inf, |b|_inf) + 2.
  mpz_class xi = 2 * std::min(max_abs(pa), max_abs(pb)) + 29;
  const std::size_t limit_bits = std::size_t{1} << 24;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const std::size_t width = mpz_sizeinbase(xi.get_mpz_t(), 2);
    if (width * static_cast<std::size_t>(std::max(degree_of(pa), degree_of(pb)) + 1) > limit_bits) break;
    const mpz_class g = gcd(evaluate(pa, xi), evaluate(pb, xi));
    const IntPoly candidate = primitive_part(symmetric_digits(g, xi));
    if (!candidate.empty() && divide_exact(pa, candidate) && divide_exact(pb, candidate)) return candidate;
    xi = xi * 73794 / 27011;
  }
  return prs_gcd(pa, pb);
}

std::vector<SquareFreeFactor> square_free_decomposition(const IntPoly& p) {
  const IntPoly f = primitive_part(p);
  std::vector<SquareFreeFactor> out;
  if (degree_of(f) <= 0) return out;
  const IntPoly df = derivative(f);
  const IntPoly a0 = poly_gcd(f, df);
  IntPoly b = *divide_exact(f, a0);
  IntPoly c = *divide_exact(df, a0);
  IntPoly d = subtract(c, derivative(b));
  for (unsigned i = 1; degree_of(b) > 0; ++i) {
    const IntPoly a = poly_gcd(b, d);
    b = *divide_exact(b, a);
    c = d.empty() ? IntPoly{} : *divide_exact(d, a);
    d = subtract(c, derivative(b));
    if (degree_of(a) > 0) out.push_back(SquareFreeFactor{a, i});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Roots

std::vector<RootEnclosure> isolate_roots(const IntPoly& square_free, Precision bits) {
  const IntPoly p = normalized(square_free);
  const long n = degree_of(p);
  if (n < 1) throw std::invalid_argument("root isolation needs positive degree");

  std::vector<Complex> z = initial_points(p, 128);
  std::vector<Real> coeffs, abs_coeffs;
  const Precision target = bits + 32;
  Precision level = 128;
  for (;;) {
    coeffs.clear();
    abs_coeffs.clear();
    for (const auto& c : p) {
      coeffs.emplace_back(c, level);
      abs_coeffs.push_back(abs(coeffs.back()));
    }
    for (auto& zk : z) zk = with_bits(zk, level);
    const Real tolerance = pow2(-static_cast<long>(level) + 16, level);
    const int max_iterations = level == 128 ? 200 + 10 * static_cast<int>(n) : 40;
    bool converged = false;
    for (int it = 0; it < max_iterations && !converged; ++it) {
      converged = true;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const Evaluation e = horner(coeffs, abs_coeffs, z[k], level);
        if (abs(e.value) <= e.error) continue;  // indistinguishable from a root at this precision
        if (e.slope.re.is_zero() && e.slope.im.is_zero())
          throw RootIsolationError("vanishing derivative during Aberth iteration");
        const Complex ratio = e.value / e.slope;
        Complex sum(level);
        for (std::size_t l = 0; l < z.size(); ++l)
          if (l != k) sum += Complex(Real(1L, level), Real(level)) / (z[k] - z[l]);
        const Complex step = ratio / (Complex(Real(1L, level), Real(level)) - ratio * sum);
        z[k] -= step;
        if (abs(step) > tolerance * max(abs(z[k]), Real(1L, level))) converged = false;
      }
    }
    if (!converged) throw RootIsolationError("Aberth iteration did not converge at " + std::to_string(level) + " bits");
    if (level >= target) break;
    level = std::min(level * 2, target);
  }

  // Certification: radius n |p(z_k)| / (|lead| prod |z_k - z_l|), inflated for rounding.
  const Real inflate = Real(1L, level) + pow2(-static_cast<long>(level) + 24, level);
  std::vector<RootEnclosure> out;
  out.reserve(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const Evaluation e = horner(coeffs, abs_coeffs, z[k], level);
    Real denominator = abs(coeffs.back());
    for (std::size_t l = 0; l < z.size(); ++l)
      if (l != k) denominator *= abs(z[k] - z[l]);
    if (denominator.is_zero()) throw RootIsolationError("coincident root approximations");
    Real radius = (abs(e.value) + e.error) * static_cast<long>(n) / denominator * inflate;
    out.push_back(RootEnclosure{z[k], std::move(radius)});
  }
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t l = k + 1; l < out.size(); ++l)
      if (!(abs(out[k].center - out[l].center) > out[k].radius + out[l].radius))
        throw RootIsolationError("root disks overlap");
  return out;
}

Real mahler_measure(const IntPoly& p_in, Precision bits, Real* error_bound) {
  const IntPoly p = normalized(p_in);
  if (p.empty()) throw std::invalid_argument("Mahler measure of the zero polynomial");
  const Precision w = bits + 32;
  const Real one(1L, w);
  Real value = log_of(abs(content(p)), w);
  Real error(w);
  for (const auto& sf : square_free_decomposition(p)) {
    const IntPoly& f = sf.factor;
    Real part = log_of(abs(f.back()), w);
    Real part_error(w);
    if (degree_of(f) == 1) {
      // single rational root -f0/f1
      if (f[0] != 0) part = max(log_of(abs(f[0]), w), part);
    } else {
      bool done = false;
      std::string last_failure;
      for (int attempt = 0; attempt < 4 && !done; ++attempt) {
        const Precision p_bits = bits << attempt;
        std::vector<RootEnclosure> roots;
        try {
          roots = isolate_roots(f, p_bits);
        } catch (const RootIsolationError& e) {
          last_failure = e.what();
          continue;
        }
        Real sum = log_of(abs(f.back()), w);
        Real err(w);
        for (const auto& r : roots) {
          const Real m = abs(r.center).with_precision(w);
          sum += log(max(m, one));
          err += log(max(m + r.radius, one)) - log(max(m - r.radius, one));
        }
        if (err <= pow2(-static_cast<long>(bits / 2), w)) {
          part = std::move(sum);
          part_error = std::move(err);
          done = true;
        } else {
          last_failure = "enclosure error " + err.to_string(6);
        }
      }
      if (!done) throw RootIsolationError("Mahler measure not certified: " + last_failure);
    }
    value += part * static_cast<long>(sf.multiplicity);
    error += part_error * static_cast<long>(sf.multiplicity);
  }
  if (error_bound) *error_bound = error.with_precision(bits);
  return value.with_precision(bits);
}

Real log_length(const IntPoly& p, Precision bits) {
  mpz_class total = 0;
  for (const auto& c : p) total += abs(c);
  if (total == 0) throw std::invalid_argument("length of the zero polynomial");
  return log_of(total, bits);
}

}  // namespace modpoly
