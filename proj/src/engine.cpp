#include "modpoly/engine.hpp"

#include <mpfr.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "modpoly/arithfun.hpp"
#include "parallel.hpp"

namespace modpoly {

namespace {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;
constexpr long kCertificateExponent = -32;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RationalPoint canonical_point(mpq_class re, mpq_class im) {
  re.canonicalize();
  im.canonicalize();
  return RationalPoint{std::move(re), std::move(im)};
}

// One evaluation node tau = i y with y = (psi + 1 + m) / (psi + 1).
mpq_class node_height(std::uint64_t psi, std::uint64_t m) {
  mpq_class y(static_cast<unsigned long>(psi + 1 + m), static_cast<unsigned long>(psi + 1));
  y.canonicalize();
  return y;
}

// X-coefficients of prod over C_N of (X - j(tau_gamma)) at tau = i y, ascending.
// Orbit points b and d - b are mirror images, so j takes conjugate values and
// each pair contributes the real quadratic X^2 - 2 Re(j) X + |j|^2.
std::vector<Real> node_polynomial(const std::vector<IsogenyMatrix>& cn, const mpq_class& y, Precision w) {
  const std::size_t psi = cn.size();
  std::vector<Real> poly;
  poly.reserve(psi + 1);
  poly.emplace_back(1L, w);
  for (std::size_t k = 0; k < psi; ++k) poly.emplace_back(w);
  std::size_t deg = 0;
  Real t(w), s(w), p(w);

  for (const auto& g : cn) {
    if (2 * g.b > g.d) continue;  // handled with its partner d - b
    const RationalPoint tau_gamma = canonical_point(mpq_class(static_cast<unsigned long>(g.b), g.d),
                                                    y * mpq_class(static_cast<unsigned long>(g.a), g.d));
    const RationalReduction reduced = reduce_to_F(tau_gamma);
    const Complex j = j_near_cusp(reduced.point.to_point(w + 32), w);

    if (g.b == 0 || 2 * g.b == g.d) {
      // X - r: new[k] = old[k-1] - r old[k]
      for (std::size_t k = deg + 1; k >= 1; --k) {
        mpfr_mul(t.get(), j.re.get(), poly[k].get(), kRnd);
        mpfr_sub(poly[k].get(), poly[k - 1].get(), t.get(), kRnd);
      }
      mpfr_mul(poly[0].get(), poly[0].get(), j.re.get(), kRnd);
      mpfr_neg(poly[0].get(), poly[0].get(), kRnd);
      deg += 1;
    } else {
      // X^2 - s X + p: new[k] = old[k-2] - s old[k-1] + p old[k]
      mpfr_mul_2ui(s.get(), j.re.get(), 1, kRnd);
      mpfr_sqr(p.get(), j.re.get(), kRnd);
      mpfr_sqr(t.get(), j.im.get(), kRnd);
      mpfr_add(p.get(), p.get(), t.get(), kRnd);
      for (std::size_t k = deg + 2; k >= 2; --k) {
        mpfr_mul(poly[k].get(), poly[k].get(), p.get(), kRnd);
        mpfr_mul(t.get(), poly[k - 1].get(), s.get(), kRnd);
        mpfr_sub(poly[k].get(), poly[k].get(), t.get(), kRnd);
        mpfr_add(poly[k].get(), poly[k].get(), poly[k - 2].get(), kRnd);
      }
      mpfr_mul(poly[1].get(), poly[1].get(), p.get(), kRnd);
      mpfr_mul(t.get(), poly[0].get(), s.get(), kRnd);
      mpfr_sub(poly[1].get(), poly[1].get(), t.get(), kRnd);
      mpfr_mul(poly[0].get(), poly[0].get(), p.get(), kRnd);
      deg += 2;
    }
  }
  return poly;
}

// Newton divided differences of one row of values, then the Newton form
// expanded to monomials in Y, all at precision p.
std::vector<Real> interpolate_row(const std::vector<Real>& values, const std::vector<Real>& nodes,
                                  const std::vector<std::vector<Real>>& inverse_gaps, Precision p) {
  const std::size_t count = nodes.size();
  std::vector<Real> d;
  d.reserve(count);
  for (const auto& v : values) d.push_back(v.with_precision(p));
  Real scratch(p), factor(p);
  for (std::size_t k = 1; k < count; ++k) {
    for (std::size_t m = count - 1; m >= k; --m) {
      // d[m] = (d[m] - d[m-1]) / (Y_m - Y_{m-k})
      mpfr_sub(scratch.get(), d[m].get(), d[m - 1].get(), kRnd);
      mpfr_set(factor.get(), inverse_gaps[k][m].get(), kRnd);
      mpfr_mul(d[m].get(), scratch.get(), factor.get(), kRnd);
    }
  }
  std::vector<Real> q;
  q.reserve(count);
  for (std::size_t t = 0; t < count; ++t) q.emplace_back(p);
  mpfr_set(q[0].get(), d[count - 1].get(), kRnd);
  for (std::size_t k = count - 1; k-- > 0;) {
    // q <- q (Y - Y_k) + d_k
    mpfr_set(factor.get(), nodes[k].get(), kRnd);
    const std::size_t deg = count - 1 - k;
    for (std::size_t t = deg; t >= 1; --t) {
      mpfr_mul(scratch.get(), q[t].get(), factor.get(), kRnd);
      mpfr_sub(q[t].get(), q[t - 1].get(), scratch.get(), kRnd);
    }
    mpfr_mul(scratch.get(), q[0].get(), factor.get(), kRnd);
    mpfr_sub(q[0].get(), d[k].get(), scratch.get(), kRnd);
  }
  return q;
}

mpfr_exp_t exponent_or_min(const Real& x) {
  return x.is_zero() ? std::numeric_limits<mpfr_exp_t>::min() : mpfr_get_exp(x.get());
}

}  // namespace

PrecisionExhausted::PrecisionExhausted(std::uint64_t n_, Precision last_bits_, const std::string& reason)
    : std::runtime_error("Phi_" + std::to_string(n_) + " not certified up to " + std::to_string(last_bits_) +
                         " bits: " + reason),
      n(n_),
      last_bits(last_bits_) {}

bool ModularPolynomial::is_symmetric() const {
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (coeffs[i][j] != coeffs[j][i]) return false;
  return true;
}

bool ModularPolynomial::is_monic_in_x() const {
  if (coeffs.empty()) return false;
  const auto& top = coeffs.back();
  if (top[0] != 1) return false;
  return std::all_of(top.begin() + 1, top.end(), [](const mpz_class& c) { return c == 0; });
}

Precision phi_base_bits(std::uint64_t n) {
  const FactoredInteger f = factor(n);
  const double psi_n = static_cast<double>(psi(f));
  const double lambda = lambda_vector(f).evaluate(128).to_double();
  const double bound = 6.0 * psi_n * (std::log(static_cast<double>(n)) - 2.0 * lambda + 9.5387);
  return static_cast<Precision>(std::ceil(1.2 * bound / std::log(2.0))) + 16 * static_cast<Precision>(psi_n) + 256;
}

PrecisionPolicy phi_policy(std::uint64_t n) {
  PrecisionPolicy policy;
  policy.base_bits = phi_base_bits(n);
  policy.retry_num = 2;
  policy.retry_den = 1;
  policy.max_retries = 3;
  return policy;
}

ModularPolynomial compute_phi_at(std::uint64_t n, Precision bits, const EngineConfig& config,
                                 EngineTimings* timings) {
  if (n == 0) throw std::invalid_argument("N must be positive");
  const auto cn = enumerate_CN(n);
  const std::size_t psi_n = cn.size();
  if (psi_n > config.psi_ceiling)
    throw std::invalid_argument("psi(" + std::to_string(n) + ") = " + std::to_string(psi_n) +
                                " exceeds the ceiling " + std::to_string(config.psi_ceiling));
  const Precision w = bits;
  const std::size_t count = psi_n + 1;

  auto start = std::chrono::steady_clock::now();
  std::vector<Real> nodes(count, Real(w));
  std::vector<std::vector<Real>> values(count);  // values[m][i] = c_i(Y_m)
  detail::parallel_for(count, config.jobs, [&](std::size_t m) {
    const mpq_class y = node_height(psi_n, m);
    nodes[m] = j_near_cusp(HalfPlanePoint::from_rational(0, y, w + 32), w).re;
    values[m] = node_polynomial(cn, y, w);
  });
  if (timings) timings->products += seconds_since(start);

  start = std::chrono::steady_clock::now();
  // 1 / (Y_m - Y_{m-k}) for k >= 1, m >= k, shared by every row.
  std::vector<std::vector<Real>> inverse_gaps(count);
  for (std::size_t k = 1; k < count; ++k) {
    inverse_gaps[k].reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
      if (m < k) {
        inverse_gaps[k].emplace_back(64);
        continue;
      }
      Real gap = nodes[m] - nodes[m - k];
      mpfr_ui_div(gap.get(), 1, gap.get(), kRnd);
      inverse_gaps[k].push_back(std::move(gap));
    }
  }

  // Rows with smaller values keep the absolute accuracy of the largest row
  // with proportionally fewer bits (plus 64 guard bits).
  std::vector<mpfr_exp_t> row_exponent(count, std::numeric_limits<mpfr_exp_t>::min());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t m = 0; m < count; ++m) row_exponent[i] = std::max(row_exponent[i], exponent_or_min(values[m][i]));
  const mpfr_exp_t top = *std::max_element(row_exponent.begin(), row_exponent.end());

  std::vector<std::vector<Real>> raw(count);  // raw[i][k]: X^i Y^k before rounding
  detail::parallel_for(count, config.jobs, [&](std::size_t i) {
    const long shortfall = static_cast<long>(top - row_exponent[i]);
    const Precision p = std::clamp<long>(static_cast<long>(w) - shortfall + 64, 128, static_cast<long>(w));
    std::vector<Real> row;
    row.reserve(count);
    for (std::size_t m = 0; m < count; ++m) row.push_back(values[m][i]);
    raw[i] = interpolate_row(row, nodes, inverse_gaps, p);
  });
  if (timings) {
    timings->interpolation += seconds_since(start);
    timings->attempts += 1;
  }

  ModularPolynomial phi;
  phi.n = n;
  phi.precision_used = w;
  phi.coeffs.assign(count, std::vector<mpz_class>(count));
  phi.residual = Real(64);
  phi.asymmetry = Real(64);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < count; ++k) {
      phi.coeffs[i][k] = raw[i][k].round_to_integer();
      const Real err = abs(raw[i][k] - Real(phi.coeffs[i][k], raw[i][k].precision()));
      if (err > phi.residual) phi.residual = err.with_precision(64);
    }
  }
  if (n > 1) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t k = 0; k < i; ++k) {
        const Real diff = abs(raw[i][k] - raw[k][i]);
        if (diff > phi.asymmetry) phi.asymmetry = diff.with_precision(64);
      }
  }
  return phi;
}

ModularPolynomial compute_phi(std::uint64_t n, const PrecisionPolicy& policy, const EngineConfig& config,
                              EngineTimings* timings) {
  policy.validate();
  const Real threshold = pow2(kCertificateExponent, 64);
  std::string reason;
  Precision bits = policy.base_bits;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    bits = policy.bits_for_attempt(attempt);
    ModularPolynomial phi = compute_phi_at(n, bits, config, timings);
    if (!(phi.residual < threshold)) {
      reason = "residual " + phi.residual.to_string(6);
      continue;
    }
    if (!phi.is_monic_in_x()) {
      reason = "not monic in X";
      continue;
    }
    if (n > 1) {
      // Symmetry is checked, not imposed: the rounded matrix must be symmetric
      // and the raw asymmetry must stay below twice the rounding residual.
      if (!phi.is_symmetric() || !(phi.asymmetry.is_zero() || phi.asymmetry < phi.residual * 2L)) {
        reason = "asymmetry " + phi.asymmetry.to_string(6) + " against residual " + phi.residual.to_string(6);
        continue;
      }
    }
    return phi;
  }
  throw PrecisionExhausted(n, bits, reason);
}

ModularPolynomial compute_phi(std::uint64_t n) { return compute_phi(n, phi_policy(n)); }

HeightValue height(const ModularPolynomial& phi, Precision bits) {
  HeightValue h;
  const mpz_class* best = nullptr;
  for (std::size_t i = 0; i < phi.coeffs.size(); ++i)
    for (std::size_t j = 0; j < phi.coeffs[i].size(); ++j) {
      const mpz_class& c = phi.coeffs[i][j];
      if (best == nullptr || mpz_cmpabs(c.get_mpz_t(), best->get_mpz_t()) > 0) {
        best = &c;
        h.i = i;
        h.j = j;
      }
    }
  if (best == nullptr || *best == 0) throw std::invalid_argument("height of the zero polynomial");
  h.value = log_of(abs(*best), bits);
  return h;
}

std::vector<mpz_class> specialize_y(const ModularPolynomial& phi, const mpz_class& y0) {
  std::vector<mpz_class> out(phi.coeffs.size());
  for (std::size_t i = 0; i < phi.coeffs.size(); ++i) {
    const auto& row = phi.coeffs[i];
    mpz_class acc = 0;
    for (std::size_t j = row.size(); j-- > 0;) acc = acc * y0 + row[j];
    out[i] = acc;
  }
  return out;
}

Real vanishing_ratio(const ModularPolynomial& phi, const HalfPlanePoint& tau, Precision bits) {
  const Precision w = bits + 32;
  const Real n(static_cast<long>(phi.n), w);
  const Complex x = j_value(tau, w);
  const Complex y = j_value(HalfPlanePoint(tau.re().with_precision(w) * n, tau.im().with_precision(w) * n), w);
  const std::size_t count = phi.coeffs.size();
  std::vector<Complex> xp(count, Complex(Real(1L, w), Real(w)));
  std::vector<Complex> yp(count, Complex(Real(1L, w), Real(w)));
  for (std::size_t k = 1; k < count; ++k) {
    xp[k] = xp[k - 1] * x;
    yp[k] = yp[k - 1] * y;
  }
  Complex sum(w);
  Real largest(w);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < count; ++k) {
      if (phi.coeffs[i][k] == 0) continue;
      const Complex term = xp[i] * yp[k] * Real(phi.coeffs[i][k], w);
      sum += term;
      largest = max(largest, abs(term));
    }
  return (abs(sum) / largest).with_precision(bits);
}

void write_phimat(std::ostream& out, const ModularPolynomial& phi) {
  const HeightValue h = height(phi, 128);
  char* buffer = nullptr;
  mpfr_asprintf(&buffer, "%.20Rf", h.value.get());
  const std::string height_text(buffer);
  mpfr_free_str(buffer);
  mpfr_asprintf(&buffer, "%.6Re", phi.residual.get());
  const std::string residual_text(buffer);
  mpfr_free_str(buffer);

  out << "PHIMAT v1 N=" << phi.n << " psi=" << phi.degree() << " height_log=" << height_text << '\n';
  for (std::size_t i = 0; i < phi.coeffs.size(); ++i)
    for (std::size_t j = i; j < phi.coeffs.size(); ++j)
      if (phi.coeffs[i][j] != 0) out << i << ' ' << j << ' ' << phi.coeffs[i][j].get_str() << '\n';
  out << "residual " << residual_text << '\n';
}

ModularPolynomial read_phimat(std::istream& in) {
  const auto fail = [](const std::string& what) -> void { throw std::runtime_error("PHIMAT: " + what); };
  std::string line;
  if (!std::getline(in, line)) fail("empty input");
  std::uint64_t n = 0, degree = 0;
  std::string height_text;
  {
    std::istringstream header(line);
    std::string magic, version, n_field, psi_field, height_field;
    header >> magic >> version >> n_field >> psi_field >> height_field;
    if (magic != "PHIMAT" || version != "v1") fail("bad magic in '" + line + "'");
    if (n_field.rfind("N=", 0) != 0 || psi_field.rfind("psi=", 0) != 0 || height_field.rfind("height_log=", 0) != 0)
      fail("bad header '" + line + "'");
    try {
      n = std::stoull(n_field.substr(2));
      degree = std::stoull(psi_field.substr(4));
    } catch (const std::exception&) {
      fail("bad header numbers in '" + line + "'");
    }
    height_text = height_field.substr(11);
    std::string extra;
    if (header >> extra) fail("trailing header field '" + extra + "'");
  }
  if (n == 0 || psi(factor(n)) != degree) fail("psi does not match N");

  ModularPolynomial phi;
  phi.n = n;
  phi.coeffs.assign(degree + 1, std::vector<mpz_class>(degree + 1));
  bool have_residual = false;
  long long last = -1;
  while (std::getline(in, line)) {
    if (have_residual) fail("content after the residual line");
    std::istringstream fields(line);
    std::string first;
    fields >> first;
    if (first == "residual") {
      std::string value, extra;
      fields >> value;
      if (value.empty() || (fields >> extra)) fail("bad residual line '" + line + "'");
      try {
        phi.residual = Real::from_string(value, 64);
      } catch (const std::invalid_argument&) {
        fail("bad residual '" + value + "'");
      }
      have_residual = true;
      continue;
    }
    std::string j_text, c_text, extra;
    fields >> j_text >> c_text;
    if (c_text.empty() || (fields >> extra)) fail("bad entry '" + line + "'");
    std::uint64_t i = 0, j = 0;
    mpz_class c;
    try {
      i = std::stoull(first);
      j = std::stoull(j_text);
    } catch (const std::exception&) {
      fail("bad index in '" + line + "'");
    }
    if (c.set_str(c_text, 10) != 0 || c == 0) fail("bad coefficient in '" + line + "'");
    if (i > j || j > degree) fail("index out of range in '" + line + "'");
    const long long key = static_cast<long long>(i * (degree + 1) + j);
    if (key <= last) fail("entries not strictly sorted at '" + line + "'");
    last = key;
    phi.coeffs[i][j] = c;
    if (i != j) phi.coeffs[j][i] = n == 1 ? mpz_class(-c) : c;
  }
  if (!have_residual) fail("missing residual line");

  const HeightValue h = height(phi, 128);
  Real stated(128);
  try {
    stated = Real::from_string(height_text, 128);
  } catch (const std::invalid_argument&) {
    fail("bad height_log '" + height_text + "'");
  }
  if (abs(stated - h.value) > pow2(-40, 128)) fail("height_log disagrees with the coefficients");
  return phi;
}

}  // namespace modpoly
