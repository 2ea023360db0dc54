#include "modpoly/bound_verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "modpoly/arithfun.hpp"
#include "modpoly/isogeny.hpp"
#include "modpoly/mahler.hpp"
#include "parallel.hpp"

namespace modpoly {

namespace {

Real constant(double value, Precision bits) {
  // Decimal constants are parsed from their shortest round-trip text so that
  // 9.5387 means the decimal 9.5387, not the nearest double.
  char text[32];
  std::snprintf(text, sizeof text, "%.17g", value);
  std::string s(text);
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(text, sizeof text, "%.*g", digits, value);
    if (std::strtod(text, nullptr) == value) {
      s = text;
      break;
    }
  }
  return Real::from_string(s, bits);
}

std::string tau_text(const HalfPlanePoint& tau) { return tau.re().to_string(12) + " + i " + tau.im().to_string(12); }

Real log_n(std::uint64_t n, Precision bits) { return log_of(mpz_class(static_cast<unsigned long>(n)), bits); }

struct Level {
  std::uint64_t psi;
  Real log_n;
  Real lambda;
  Real base;  // log N - 2 lambda
};

Level level(std::uint64_t n, Precision bits) {
  const auto f = factor(n);
  Level l{psi(f), log_n(n, bits), lambda_vector(f).evaluate(bits), Real(bits)};
  l.base = l.log_n - l.lambda * 2L;
  return l;
}

Real height_of(const std::vector<mpz_class>& p, Precision bits) {
  mpz_class top = 0;
  for (const auto& c : p)
    if (mpz_cmpabs(c.get_mpz_t(), top.get_mpz_t()) > 0) top = abs(c);
  return top == 0 ? Real(bits) : log_of(top, bits);
}

Real log_max_one(const Real& x) {
  const Real a = abs(x);
  return a > 1L ? log(a) : Real(x.precision());
}

}  // namespace

// ---------------------------------------------------------------------------
// Height bounds

std::vector<BoundReport> height_bound_reports(std::uint64_t n, const ModularPolynomial& phi, Precision bits,
                                              const BoundConstants& c) {
  const Level l = level(n, bits);
  const HeightValue h = height(phi, bits);
  const long six_psi = 6 * static_cast<long>(l.psi);
  const std::map<std::string, std::string> ctx{{"witness", std::to_string(h.i) + "," + std::to_string(h.j)}};
  return {
      make_report("height_lower", n, h.value, (l.base + constant(c.height_lower, bits)) * six_psi, Claim::at_least,
                  bits, ctx),
      make_report("height_upper", n, h.value, (l.base + constant(c.height_upper, bits)) * six_psi, Claim::at_most,
                  bits, ctx),
  };
}

BoundReport loglog_height_report(std::uint64_t n, const ModularPolynomial& phi, Precision bits,
                                 const BoundConstants& c) {
  if (n < 2) throw std::invalid_argument("loglog_height_report: N must be at least 2");
  const Level l = level(n, bits);
  const Real rhs = (l.base + log(l.log_n) + constant(c.loglog_upper, bits)) * (6 * static_cast<long>(l.psi));
  return make_report("height_loglog_upper", n, height(phi, bits).value, rhs, Claim::at_most, bits);
}

// ---------------------------------------------------------------------------
// Mahler measure against height

std::vector<BoundReport> mahler_height_reports(std::uint64_t n, const ModularPolynomial& phi,
                                               const HalfPlanePoint& tau, Precision bits) {
  const Level l = level(n, bits);
  const Real h = height(phi, bits).value;
  const Real log_psi1 = log(Real(static_cast<long>(l.psi) + 1, bits));
  const Real j_abs = abs(j_value(tau, bits));

  const Real s_tau = s_n(n, tau, bits);
  const Real rhs_a = log_psi1 * 2L + log_max_one(j_abs) * static_cast<long>(l.psi) + h;
  const Real s_rho = s_n(n, HalfPlanePoint::rho(bits), bits);
  return {
      make_report("mahler_height", n, s_tau, rhs_a, Claim::at_most, bits, {{"tau", tau_text(tau)}}),
      make_report("mahler_height_rho", n, s_rho, log_psi1 + h, Claim::at_most, bits),
  };
}

BoundReport sn_rho_lower_report(std::uint64_t n, Precision bits, const BoundConstants& c) {
  const Level l = level(n, bits);
  const Real log_delta_rho = log(abs(delta_rho_closed_form(bits)));
  const long psi_n = static_cast<long>(l.psi);
  const Real rhs = l.base * (6 * psi_n) - log_delta_rho * psi_n - constant(c.contour_min, bits) * psi_n;
  return make_report("sn_rho_lower", n, s_n(n, HalfPlanePoint::rho(bits), bits), rhs, Claim::at_least, bits);
}

std::vector<BoundReport> specialized_height_reports(std::uint64_t n, const ModularPolynomial& phi, long j0,
                                                    Precision bits, const BoundConstants& c) {
  if (j0 < 0) throw std::invalid_argument("specialized_height_reports: j0 must be nonnegative");
  const Level l = level(n, bits);
  const Real h_spec = height_of(specialize_y(phi, j0), bits);
  const Real j = Real(j0, bits);
  const Real s = s_n(n, inverse_j_real(j, bits), bits);
  const long psi_n = static_cast<long>(l.psi);
  const std::map<std::string, std::string> ctx{{"j0", std::to_string(j0)}};
  return {
      make_report("specialized_height_mahler", n, h_spec, s - log(Real(psi_n + 1, bits)), Claim::at_least, bits,
                  ctx),
      make_report("specialized_height_lower", n, h_spec, (log_max_one(j) - constant(c.specialized, bits)) * psi_n,
                  Claim::at_least, bits, ctx),
  };
}

// ---------------------------------------------------------------------------
// Hecke averages

std::vector<BoundReport> hecke_reports(std::uint64_t n, const ModularPolynomial* phi, long j_e, Precision bits,
                                       bool with_mahler, const BoundConstants& c) {
  if (n < 2) throw std::invalid_argument("hecke_reports: N must be at least 2");
  if (j_e < 0) throw std::invalid_argument("hecke_reports: j_E must be nonnegative");
  const Level l = level(n, bits);
  const long psi_n = static_cast<long>(l.psi);
  const Real j = Real(j_e, bits);
  const HalfPlanePoint tau = inverse_j_real(j, bits);
  const Real h_inf = log_max_one(j);
  const Real s = s_n(n, tau, bits);
  const Real d = h_inf - s / psi_n;
  const std::map<std::string, std::string> ctx{{"j_E", std::to_string(j_e)}, {"tau_E", tau_text(tau)}};

  std::vector<BoundReport> out;
  const Real log_psi1 = log(Real(psi_n + 1, bits));
  if (phi) {
    const Real h = height(*phi, bits).value;
    out.push_back(make_report("hecke_lower_intermediate", n, d, -(h + log_psi1 * 2L) / psi_n, Claim::at_least,
                              bits, ctx));
  }
  out.push_back(make_report("hecke_lower", n, d, l.lambda * 12L - l.log_n * 6L - constant(c.hecke_lower, bits),
                            Claim::at_least, bits, ctx));
  const Real inner = log(h_inf + 1L) - l.base + constant(c.hecke_shift, bits);
  const Real upper = constant(c.hecke_upper, bits) + min(Real(bits), inner) * 6L;
  out.push_back(make_report("hecke_upper", n, d, upper, Claim::at_most, bits, ctx));
  if (Real(static_cast<long>(n), bits) <= tau.im())
    out.push_back(make_report("hecke_remark", n, abs(d), constant(c.hecke_remark, bits), Claim::at_most, bits, ctx));
  if (phi && with_mahler) {
    Real err(bits);
    const Real m = mahler_measure(specialize_y(*phi, j_e), bits, &err);
    auto r = make_report("hecke_mahler_identity", n, m, s, Claim::equal, bits, ctx);
    r.context["mahler_error"] = err.to_string(6);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpolation

BoundReport interpolation_report(std::uint64_t n, const ModularPolynomial& phi, Precision bits) {
  const Level l = level(n, bits);
  Real best(bits);
  std::string best_tau;
  for (long k = 0; k < 8; ++k) {
    const Real j = Real(mpq_class(1728 * (7 + k), 7), bits);
    const HalfPlanePoint tau = inverse_j_real(j, bits);
    const Real s = s_n(n, tau, bits);
    if (k == 0 || s > best) {
      best = s;
      best_tau = tau_text(tau);
    }
  }
  const Real log1728 = log(Real(1728L, bits));
  const Real per_psi = (log1728 + 1L) / 1728L + log(Real(2L, bits)) * 4L;
  const Real rhs = best + per_psi * static_cast<long>(l.psi);
  return make_report("interpolation", n, height(phi, bits).value, rhs, Claim::at_most, bits, {{"argmax", best_tau}});
}

// ---------------------------------------------------------------------------
// Log Im sums

std::vector<BoundReport> log_im_reports(std::uint64_t n, const mpq_class& y, Precision bits) {
  const mpq_class ny = mpq_class(static_cast<unsigned long>(n)) * y;
  std::size_t count = 0;
  mpq_class min_im, max_ratio_upper, max_ratio_reduced;
  for (const auto& g : enumerate_CN(n)) {
    if (mpq_class(static_cast<unsigned long>(g.d)) * static_cast<unsigned long>(g.d) < ny) continue;
    const HatTau ht = hat_tau(n, y, g);
    const mpq_class kk(static_cast<unsigned long>(ht.k * ht.k));
    const mpq_class dd(static_cast<unsigned long>(g.d * g.d));
    const mpq_class ratio_upper = ht.tau_hat.im * ny * kk / dd;
    const mpq_class ratio_reduced = ht.tau_reduced.im / ht.tau_hat.im;
    if (count == 0 || ht.tau_hat.im < min_im) min_im = ht.tau_hat.im;
    if (count == 0 || ratio_upper > max_ratio_upper) max_ratio_upper = ratio_upper;
    if (count == 0 || ratio_reduced > max_ratio_reduced) max_ratio_reduced = ratio_reduced;
    ++count;
  }
  std::map<std::string, std::string> ctx{{"y", y.get_str()}, {"gammas", std::to_string(count)}};
  if (count == 0) {
    // No gamma with d^2 >= N y: the per-gamma claims hold vacuously.
    min_im = mpq_class(1, 2);
    max_ratio_upper = 1;
    max_ratio_reduced = 4;
  }
  const auto R = [&](const mpq_class& q) { return Real(q, bits); };
  std::vector<BoundReport> out{
      make_exact_report("hat_tau_im_lower", n, R(min_im), R(mpq_class(1, 2)), Claim::at_least,
                        min_im >= mpq_class(1, 2), ctx),
      make_exact_report("hat_tau_im_upper", n, R(max_ratio_upper), R(1), Claim::at_most, max_ratio_upper <= 1, ctx),
      make_exact_report("hat_tau_reduced", n, R(max_ratio_reduced), R(4), Claim::at_most, max_ratio_reduced <= 4,
                        ctx),
  };
  const SumAndBound large = large_d_sum(n, y, bits);
  const SumAndBound small = small_d_sum(n, y, bits);
  out.push_back(make_report("large_d_sum", n, large.value, large.bound, Claim::at_most, bits,
                            {{"y", y.get_str()}, {"terms", std::to_string(large.terms)}}));
  out.push_back(make_report("small_d_sum", n, small.value, small.bound, Claim::at_most, bits,
                            {{"y", y.get_str()}, {"terms", std::to_string(small.terms)}}));
  return out;
}

std::vector<BoundReport> mean_log_im_reports(std::uint64_t n, const HalfPlanePoint& tau, Precision bits) {
  const Level l = level(n, bits);
  const Real mean = mean_log_im(n, tau, bits);
  const Real log_im = log(tau.im().with_precision(bits));
  const Real floor_term = log(sqrt(Real(3L, bits)) / 2L);
  const Real lower = max(floor_term, log_im - l.base);
  const Real upper = Real::from_string("10.832", bits) + log_im;
  const std::map<std::string, std::string> ctx{{"tau", tau_text(tau)}};
  return {
      make_report("mean_log_im_lower", n, mean, lower, Claim::at_least, bits, ctx),
      make_report("mean_log_im_upper", n, mean, upper, Claim::at_most, bits, ctx),
  };
}

// ---------------------------------------------------------------------------
// Constant audit

std::vector<ConstantAudit> constant_audit(Precision bits) {
  const auto D = [&](const char* s) { return Real::from_string(s, bits); };
  const Real log2 = log(Real(2L, bits));
  const Real log3 = log(Real(3L, bits));
  const Real large_d_coefficient =
      D("4.75") + log2 * D("3.5") + (D("0.5") + log2) / (sqrt(Real(401L, bits)) * 2L);
  const Real log1728 = log(Real(1728L, bits));
  const Real log_delta_rho = log(abs(delta_rho_closed_form(bits)));

  // max of -log(|Delta(iy)| y^6) over [1, 1.2536]: a grid, then golden-section
  // refinement around the best grid point.
  const Real y_lo = Real(1L, bits), y_hi = D("1.2536");
  const auto g = [&](const Real& y) { return -log_delta_im6(HalfPlanePoint::imaginary(y), bits); };
  constexpr long kGrid = 400;
  Real best = g(y_lo);
  long best_k = 0;
  for (long k = 1; k <= kGrid; ++k) {
    const Real v = g(y_lo + (y_hi - y_lo) * k / kGrid);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  {
    Real a = y_lo + (y_hi - y_lo) * std::max(0L, best_k - 1) / kGrid;
    Real b = y_lo + (y_hi - y_lo) * std::min(kGrid, best_k + 1) / kGrid;
    const Real inv_phi = (sqrt(Real(5L, bits)) - 1L) / 2L;
    for (int it = 0; it < 80; ++it) {
      const Real c1 = b - (b - a) * inv_phi, c2 = a + (b - a) * inv_phi;
      if (g(c1) > g(c2))
        b = c2;
      else
        a = c1;
    }
    best = max(best, max(g(a), g(b)));
  }

  const Real sum_66601 = D("1.1266") + D("5.5335");
  std::vector<ConstantAudit> out{
      {"f(i)/6", "0.1878", f_i_closed_form(bits) / 6L, Direction::upper},
      {"large-d coefficient at N = 401", "7.2059", large_d_coefficient, Direction::upper},
      {"large-d coefficient plus 1/e", "7.5737", large_d_coefficient + Real(1L, bits) / euler_e(bits),
       Direction::upper},
      {"upper constant", "9.5387", D("9.0756") + ((log1728 + 1L) / 1728L + log2 * 4L) / 6L, Direction::upper},
      {"lower constant at psi = 402", "0.0351",
       (log_delta_rho + log(Real(403L, bits)) / 402L + D("5.5335")) / 6L, Direction::upper},
      {"mean log Im upper constant", "10.832", D("9.5387") + sum_66601 / 6L + log3 / 6L, Direction::upper},
      {"contour range", "6.6601", sum_66601, Direction::equal},
      {"specialized height constant", "7.2095", D("6.6601") + log3 / 2L, Direction::upper},
      {"Hecke lower constant", "58.34", D("9.5387") * 6L + log3, Direction::upper},
      {"Hecke upper shift", "0.25", -log(sqrt(Real(3L, bits)) / 2L) + D("1.94") - log(pi(bits) * 2L),
       Direction::upper},
      {"max -log|Delta(iy) y^6| on [1, 1.2536]", "6.5296", best, Direction::upper},
  };
  for (auto& a : out) {
    const Real paper = D(a.paper_value.c_str());
    switch (a.direction) {
      case Direction::upper:
        a.pass = a.recomputed <= paper;
        break;
      case Direction::lower:
        a.pass = a.recomputed >= paper;
        break;
      case Direction::equal:
        a.pass = a.recomputed == paper;
        break;
    }
  }
  // 6.6601 is an exact decimal sum; decide it in rationals, not in binary floating point.
  out[6].pass = mpq_class(11266, 10000) + mpq_class(55335, 10000) == mpq_class(66601, 10000);
  return out;
}

BoundReport to_report(const ConstantAudit& audit) {
  const Precision bits = audit.recomputed.precision();
  const Claim claim = audit.direction == Direction::upper   ? Claim::at_most
                      : audit.direction == Direction::lower ? Claim::at_least
                                                            : Claim::equal;
  return make_exact_report("audit_" + audit.paper_value, 0, audit.recomputed,
                           Real::from_string(audit.paper_value, bits), claim, audit.pass, {{"what", audit.name}});
}

// ---------------------------------------------------------------------------
// Harness

std::optional<Suite> parse_suite(const std::string& name) {
  if (name == "all") return Suite::all;
  if (name == "thm11") return Suite::height;
  if (name == "thm12") return Suite::hecke;
  if (name == "lemmas") return Suite::lemmas;
  if (name == "audit") return Suite::audit;
  return std::nullopt;
}

bool HarnessResult::all_pass() const {
  return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.pass; }) &&
         std::all_of(audits.begin(), audits.end(), [](const ConstantAudit& a) { return a.pass; });
}

namespace {

constexpr long kHeckeJ[] = {0, 1728, 287496};

std::vector<HalfPlanePoint> lemma_points(Precision bits) {
  return {HalfPlanePoint::i(bits), HalfPlanePoint::rho(bits),
          HalfPlanePoint::from_rational(0, 2, bits), HalfPlanePoint::from_rational(mpq_class(1, 4), mpq_class(3, 2), bits)};
}

std::vector<HalfPlanePoint> mean_points(Precision bits) {
  return {HalfPlanePoint::i(bits), HalfPlanePoint::rho(bits), HalfPlanePoint::from_rational(mpq_class(1, 2), 2, bits)};
}

std::vector<BoundReport> level_reports(std::uint64_t n, Suite suite, const ModularPolynomial* phi,
                                       const HarnessOptions& o) {
  const Precision bits = o.bits;
  std::vector<BoundReport> out;
  const auto append = [&](std::vector<BoundReport> more) {
    for (auto& r : more) out.push_back(std::move(r));
  };
  const bool all = suite == Suite::all;
  if (all || suite == Suite::height) {
    append(height_bound_reports(n, *phi, bits));
    if (n >= 2) out.push_back(loglog_height_report(n, *phi, bits));
    out.push_back(interpolation_report(n, *phi, bits));
  }
  if ((all || suite == Suite::hecke) && n >= 2)
    for (long j : kHeckeJ) append(hecke_reports(n, phi, j, bits, true));
  if (all || suite == Suite::lemmas) {
    bool first = true;
    for (const auto& tau : lemma_points(bits)) {
      auto pair = mahler_height_reports(n, *phi, tau, bits);
      out.push_back(std::move(pair[0]));
      if (first) out.push_back(std::move(pair[1]));
      first = false;
    }
    out.push_back(sn_rho_lower_report(n, bits));
    for (long j : kHeckeJ) append(specialized_height_reports(n, *phi, j, bits));
    for (const auto& y : o.heights) append(log_im_reports(n, y, bits));
    for (const auto& tau : mean_points(bits)) append(mean_log_im_reports(n, tau, bits));
  }
  return out;
}

}  // namespace

HarnessResult run_harness(const HarnessOptions& o) {
  if (o.min_n < 1 || o.max_n < o.min_n) throw std::invalid_argument("run_harness: empty or invalid N range");
  HarnessResult result;
  if (o.suite == Suite::all || o.suite == Suite::audit) {
    result.audits = constant_audit(o.bits);
    for (const auto& a : result.audits) result.reports.push_back(to_report(a));
  }
  if (o.suite != Suite::audit) {
    // Largest levels first so the pool does not end on one long job.
    std::vector<std::uint64_t> levels;
    for (std::uint64_t n = o.max_n; n >= o.min_n; --n) levels.push_back(n);
    // One slot per level keeps the order of equal (name, N) keys independent
    // of which worker finishes first.
    std::vector<std::vector<BoundReport>> slots(levels.size());
    detail::parallel_for(levels.size(), o.jobs, [&](std::size_t k) {
      const std::uint64_t n = levels[k];
      ModularPolynomial owned;
      const ModularPolynomial* phi = nullptr;
      if (o.phi_source) {
        phi = &o.phi_source(n);
      } else {
        PrecisionPolicy policy = phi_policy(n);
        if (o.phi_bits) policy.base_bits = *o.phi_bits;
        owned = compute_phi(n, policy, o.engine);
        phi = &owned;
      }
      slots[k] = level_reports(n, o.suite, phi, o);
    });
    for (auto& slot : slots)
      for (auto& r : slot) result.reports.push_back(std::move(r));
  }
  std::stable_sort(result.reports.begin(), result.reports.end(), [](const BoundReport& a, const BoundReport& b) {
    return a.name != b.name ? a.name < b.name : a.n < b.n;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string number(const Real& x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x.to_double());
  return buf;
}

}  // namespace

void write_jsonl(std::ostream& out, const std::vector<BoundReport>& reports) {
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["N"] = r.n;
    j["lhs"] = r.lhs.to_double();
    j["rhs"] = r.rhs.to_double();
    j["margin"] = r.margin.to_double();
    j["claim"] = to_string(r.claim);
    j["pass"] = r.pass;
    j["context"] = r.context;
    out << j.dump() << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << "name,N,lhs,rhs,margin,pass\n";
  for (const auto& r : reports)
    out << r.name << ',' << r.n << ',' << number(r.lhs) << ',' << number(r.rhs) << ',' << number(r.margin) << ','
        << (r.pass ? "true" : "false") << '\n';
}

std::string describe(const BoundReport& r) {
  std::ostringstream s;
  s << r.name << " N=" << r.n << (r.pass ? " PASS" : " FAIL") << "\n  lhs    " << r.lhs.to_string(30) << "\n  "
    << to_string(r.claim) << " rhs " << r.rhs.to_string(30) << "\n  margin " << r.margin.to_string(12)
    << "  tolerance " << r.tolerance.to_string(6) << '\n';
  for (const auto& [k, v] : r.context) s << "  " << k << " = " << v << '\n';
  return s.str();
}

}  // namespace modpoly
