#pragma once

// Per-level instances of the explicit inequalities on modular polynomial
// heights and Hecke orbits, the audit of the displayed numerical constants,
// and a harness that runs them over a range of levels.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "modpoly/engine.hpp"
#include "modpoly/halfplane.hpp"
#include "modpoly/report.hpp"

namespace modpoly {

/// The constants entering the checks. Tests perturb them to show the checks
/// can fail and are not vacuous.
struct BoundConstants {
  double height_upper = 9.5387;   // h <= 6 psi [log N - 2 lambda + c]
  double height_lower = -0.0351;  // h >= 6 psi [log N - 2 lambda + c]
  double loglog_upper = 4.238;    // h <= 6 psi [log N - 2 lambda + log log N + c]
  double contour_min = 5.5335;    // -min f over F
  double specialized = 7.2095;    // h(Phi(X, j)) >= psi [log max{1, |j|} - c]
  double hecke_lower = 58.34;     // D >= -6 log N + 12 lambda - c
  double hecke_upper = 6.67;      // D <= c + 6 min{0, log(1 + h(j)) - log N + 2 lambda + shift}
  double hecke_shift = 0.25;
  double hecke_remark = 6.6601;   // |D| <= c when N <= Im tau_E
};

/// Two-sided height bound: {height_lower, height_upper}.
std::vector<BoundReport> height_bound_reports(std::uint64_t n, const ModularPolynomial& phi, Precision bits,
                                              const BoundConstants& c = {});
/// The older bound with a log log N term; N >= 2.
BoundReport loglog_height_report(std::uint64_t n, const ModularPolynomial& phi, Precision bits,
                                 const BoundConstants& c = {});

/// S_N(tau) <= 2 log(psi + 1) + psi log max{1, |j(tau)|} + h and
/// S_N(rho) <= log(psi + 1) + h.
std::vector<BoundReport> mahler_height_reports(std::uint64_t n, const ModularPolynomial& phi,
                                               const HalfPlanePoint& tau, Precision bits);
/// S_N(rho) >= 6 psi (log N - 2 lambda - log|Delta(rho)| / 6 - contour_min / 6), with
/// Delta(rho) from its Gamma closed form.
BoundReport sn_rho_lower_report(std::uint64_t n, Precision bits, const BoundConstants& c = {});

/// For integral j0 >= 0: S_N(tau_0) - log(psi + 1) <= h(Phi_N(X, j0)) and
/// h(Phi_N(X, j0)) >= psi [log max{1, |j0|} - specialized].
std::vector<BoundReport> specialized_height_reports(std::uint64_t n, const ModularPolynomial& phi, long j0,
                                                    Precision bits, const BoundConstants& c = {});

/// D = log max{1, |j_E|} - S_N(tau_E) / psi for integral j_E >= 0 and N >= 2:
///   hecke_lower_intermediate  D >= -h / psi - 2 log(psi + 1) / psi
///   hecke_lower               D >= -6 log N + 12 lambda - hecke_lower
///   hecke_upper               D <= hecke_upper + 6 min{0, ...}
///   hecke_remark              |D| <= hecke_remark, only when N <= Im tau_E
///   hecke_mahler_identity     m(Phi_N(X, j_E)) == S_N(tau_E), when with_mahler
/// `phi` may be null, in which case the two reports that need it are skipped.
std::vector<BoundReport> hecke_reports(std::uint64_t n, const ModularPolynomial* phi, long j_e, Precision bits,
                                       bool with_mahler, const BoundConstants& c = {});

/// h <= max over 8 points with j(tau) equally spaced in [1728, 3456] of
/// S_N(tau) + psi ((1 + log 1728) / 1728 + 4 log 2).
BoundReport interpolation_report(std::uint64_t n, const ModularPolynomial& phi, Precision bits);

/// Per-gamma estimates for tau-hat at tau = i y (worst case over gamma with
/// d^2 >= N y, decided in exact rationals) and the two log Im sums:
///   hat_tau_im_lower, hat_tau_im_upper, hat_tau_reduced, large_d_sum, small_d_sum.
std::vector<BoundReport> log_im_reports(std::uint64_t n, const mpq_class& y, Precision bits);

/// max{log(sqrt 3 / 2), log Im tau - log N + 2 lambda} <= mean log Im tilde <= 10.832 + log Im tau.
std::vector<BoundReport> mean_log_im_reports(std::uint64_t n, const HalfPlanePoint& tau, Precision bits);

enum class Direction {
  upper,  // recomputed <= paper value
  lower,  // recomputed >= paper value
  equal,
};

struct ConstantAudit {
  std::string name;
  std::string paper_value;
  Real recomputed;
  Direction direction = Direction::upper;
  bool pass = false;
};

/// Recomputes the eleven displayed constants and checks their rounding direction.
std::vector<ConstantAudit> constant_audit(Precision bits);
/// The audit as reports named "audit_<value>" with N = 0, for uniform output.
BoundReport to_report(const ConstantAudit& audit);

enum class Suite {
  all,
  height,  // two-sided height bounds, log log bound, interpolation
  hecke,   // Hecke average bounds at j_E in {0, 1728, 287496}
  lemmas,  // Mahler/height comparisons, S_N(rho), specialized heights, log Im sums
  audit,
};

/// Parses "all", "thm11", "thm12", "lemmas", "audit" (the CLI spellings).
std::optional<Suite> parse_suite(const std::string& name);

struct HarnessOptions {
  std::uint64_t min_n = 1;
  std::uint64_t max_n = 60;
  Suite suite = Suite::all;
  unsigned jobs = 1;
  Precision bits = 256;
  /// Base precision for Phi_N; phi_policy(N) when empty.
  std::optional<Precision> phi_bits;
  EngineConfig engine;
  /// Supplies Phi_N instead of computing it; used to share one computation.
  std::function<const ModularPolynomial&(std::uint64_t)> phi_source;
  /// Heights y for the log Im sums.
  std::vector<mpq_class> heights = {mpq_class(1), mpq_class(11, 10), mpq_class(12536, 10000)};
};

struct HarnessResult {
  std::vector<BoundReport> reports;  // sorted by (name, N)
  std::vector<ConstantAudit> audits;
  bool all_pass() const;
};

/// Runs the selected suite on every level of [min_n, max_n] in a pool of
/// `jobs` workers. Throws PrecisionExhausted from the engine unchanged.
HarnessResult run_harness(const HarnessOptions& options);

/// One JSON object per line: name, N, lhs, rhs, margin, claim, pass, context.
void write_jsonl(std::ostream& out, const std::vector<BoundReport>& reports);
/// Header "name,N,lhs,rhs,margin,pass" and one row per report.
void write_csv(std::ostream& out, const std::vector<BoundReport>& reports);
/// Multi-line dump of one report with its context.
std::string describe(const BoundReport& report);

}  // namespace modpoly
