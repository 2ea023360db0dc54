// Command-line front end: Phi_N computation, arithmetic data, orbit sums,
// the contour scan and the verification harness.
//
// Exit codes: 0 all checks pass, 1 a check failed or could not be completed,
// 2 bad arguments, 3 precision exhausted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <mpfr.h>

#include "modpoly/arithfun.hpp"
#include "modpoly/bound_verify.hpp"
#include "modpoly/engine.hpp"
#include "modpoly/halfplane.hpp"
#include "modpoly/isogeny.hpp"

using namespace modpoly;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadArguments = 2;
constexpr int kPrecisionExhausted = 3;

constexpr Precision kDefaultBits = 256;

struct BadArguments : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<Precision> precision;  // --precision, else MODPOLY_PRECISION_BITS
};

std::optional<Precision> env_precision() {
  const char* text = std::getenv("MODPOLY_PRECISION_BITS");
  if (!text || !*text) return std::nullopt;
  char* end = nullptr;
  const long bits = std::strtol(text, &end, 10);
  if (*end != '\0' || bits < 64) throw BadArguments("MODPOLY_PRECISION_BITS must be an integer >= 64");
  return static_cast<Precision>(bits);
}

// Base precision for Phi_N: flag, then environment, then the formula.
PrecisionPolicy policy_for(std::uint64_t n, const Globals& g) {
  PrecisionPolicy policy = phi_policy(n);
  if (g.precision) policy.base_bits = *g.precision;
  return policy;
}

// Working precision of the floating evaluations (sn, contour, reports).
Precision eval_bits(const Globals& g) { return g.precision.value_or(kDefaultBits); }

EngineConfig engine_config(const Globals& g) {
  EngineConfig c;
  c.jobs = g.jobs;
  return c;
}

void check_level(std::uint64_t n, const EngineConfig& config) {
  if (n < 1) throw BadArguments("N must be at least 1");
  if (psi(factor(n)) > config.psi_ceiling)
    throw BadArguments("psi(" + std::to_string(n) + ") exceeds the ceiling " + std::to_string(config.psi_ceiling));
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw BadArguments("cannot open " + path + " for writing");
  return file;
}

int report_all(const std::vector<BoundReport>& reports, const std::string& format, std::ostream& out) {
  if (format == "csv")
    write_csv(out, reports);
  else
    write_jsonl(out, reports);
  bool pass = true;
  for (const auto& r : reports) {
    if (r.pass) continue;
    pass = false;
    std::cerr << describe(r);
  }
  return pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  CLI::App app{"Modular polynomials, their heights and Hecke orbit bounds"};
  app.require_subcommand(1);
  app.add_option("--jobs", g.jobs, "worker threads (default: available cores)")->check(CLI::Range(1u, 1024u));
  std::optional<long> precision_flag;
  app.add_option("--precision", precision_flag,
                 "Phi_N base precision in bits, or the working precision of floating evaluations")
      ->check(CLI::Range(64L, 1L << 24));

  // phi compute / phi height
  auto* phi_cmd = app.add_subcommand("phi", "Phi_N by evaluation and interpolation");
  phi_cmd->require_subcommand(1);
  std::uint64_t phi_n = 0;
  std::string phi_out;
  auto* compute_cmd = phi_cmd->add_subcommand("compute", "write Phi_N as PHIMAT v1");
  compute_cmd->add_option("N", phi_n)->required();
  compute_cmd->add_option("--out", phi_out, "output file (default: stdout)");
  auto* height_cmd = phi_cmd->add_subcommand("height", "log of the largest coefficient of Phi_N");
  height_cmd->add_option("N", phi_n)->required();

  // arith
  std::uint64_t arith_n = 0;
  auto* arith_cmd = app.add_subcommand("arith", "psi, lambda, kappa, psi-tilde and genus of N");
  arith_cmd->add_option("N", arith_n)->required()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));

  // sn
  std::uint64_t sn_n = 0;
  std::vector<std::string> sn_tau;
  auto* sn_cmd = app.add_subcommand("sn", "S_N(tau) = sum log max{1, |j(tau_gamma)|}");
  sn_cmd->add_option("N", sn_n)->required()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 20));
  sn_cmd->add_option("--tau", sn_tau, "real and imaginary part")->expected(2)->required();

  // contour
  std::size_t density = 10000;
  auto* contour_cmd = app.add_subcommand("contour", "extrema of log max{|Delta|, |j Delta|} on the boundary of F");
  contour_cmd->add_option("--density", density)->check(CLI::Range(std::size_t{1000}, std::size_t{10000000}));

  // verify
  HarnessOptions harness;
  std::string suite_name = "all", verify_format = "json", verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "run the inequality harness over a range of N");
  verify_cmd->add_option("--min", harness.min_n)->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 20));
  verify_cmd->add_option("--max", harness.max_n)->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 20));
  verify_cmd->add_option("--suite", suite_name)->check(CLI::IsMember({"all", "thm11", "thm12", "lemmas", "audit"}));
  verify_cmd->add_option("--format", verify_format)->check(CLI::IsMember({"json", "csv"}));
  verify_cmd->add_option("--out", verify_out, "output file (default: stdout)");

  // hecke
  std::uint64_t hecke_n = 0;
  long hecke_j = 0;
  std::string hecke_format = "json";
  auto* hecke_cmd = app.add_subcommand("hecke", "Hecke average bounds at an integral j_E >= 0");
  hecke_cmd->add_option("N", hecke_n)->required()->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 20));
  hecke_cmd->add_option("--j", hecke_j)->required()->check(CLI::Range(0L, 1L << 62));
  hecke_cmd->add_option("--format", hecke_format)->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArguments;
  }

  try {
    g.precision = precision_flag ? std::optional<Precision>(*precision_flag) : env_precision();
    const EngineConfig config = engine_config(g);

    if (*compute_cmd) {
      check_level(phi_n, config);
      const ModularPolynomial phi = compute_phi(phi_n, policy_for(phi_n, g), config);
      std::ofstream file;
      write_phimat(open_output(phi_out, file), phi);
      return kOk;
    }
    if (*height_cmd) {
      check_level(phi_n, config);
      const ModularPolynomial phi = compute_phi(phi_n, policy_for(phi_n, g), config);
      const HeightValue h = height(phi);
      mpfr_printf("N=%lu psi=%lu height_log=%.20Rf witness=%zu,%zu\n", static_cast<unsigned long>(phi_n),
                  static_cast<unsigned long>(phi.degree()), h.value.get(), h.i, h.j);
      return kOk;
    }
    if (*arith_cmd) {
      const auto f = factor(arith_n);
      std::cout << "N " << arith_n << '\n'
                << "psi " << psi(f) << '\n'
                << "lambda " << lambda_vector(f).to_string() << '\n'
                << "kappa " << kappa_vector(f).to_string() << '\n'
                << "psi_tilde " << psi_tilde(f) << '\n'
                << "genus " << genus_X0(f) << '\n';
      return kOk;
    }
    if (*sn_cmd) {
      const Precision bits = eval_bits(g);
      Real re(bits), im(bits);
      try {
        re = Real::from_string(sn_tau[0], bits);
        im = Real::from_string(sn_tau[1], bits);
      } catch (const std::exception&) {
        throw BadArguments("--tau expects two decimal numbers");
      }
      if (im.sign() <= 0) throw BadArguments("--tau needs a positive imaginary part");
      const HalfPlanePoint tau(re, im);
      std::cout << "N=" << sn_n << " S_N=" << s_n(sn_n, tau, bits).to_string(30) << '\n';
      return kOk;
    }
    if (*contour_cmd) {
      const ContourExtrema e = contour_extrema(density, eval_bits(g));
      std::cout << "max " << e.max.to_string(12) << " at " << e.argmax.re().to_string(12) << " + i "
                << e.argmax.im().to_string(12) << '\n'
                << "min " << e.min.to_string(12) << " at " << e.argmin.re().to_string(12) << " + i "
                << e.argmin.im().to_string(12) << '\n'
                << "samples arc=" << e.arc_samples << " line=" << e.line_samples << " curve=" << e.curve_samples
                << '\n';
      return kOk;
    }
    if (*verify_cmd) {
      if (harness.max_n < harness.min_n) throw BadArguments("--max must be at least --min");
      harness.suite = *parse_suite(suite_name);
      harness.jobs = g.jobs;
      harness.bits = kDefaultBits;
      harness.phi_bits = g.precision;
      if (harness.suite != Suite::audit)
        for (std::uint64_t n = harness.min_n; n <= harness.max_n; ++n) check_level(n, config);
      // Parallelism goes to the pool over N; each engine call runs single-threaded.
      harness.engine.jobs = 1;
      const HarnessResult result = run_harness(harness);
      std::ofstream file;
      int code = report_all(result.reports, verify_format, open_output(verify_out, file));
      for (const auto& a : result.audits)
        if (!a.pass) code = kCheckFailed;
      return code;
    }
    if (*hecke_cmd) {
      check_level(hecke_n, config);
      const ModularPolynomial phi = compute_phi(hecke_n, policy_for(hecke_n, g), config);
      return report_all(hecke_reports(hecke_n, &phi, hecke_j, kDefaultBits, true), hecke_format, std::cout);
    }
  } catch (const BadArguments& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadArguments;
  } catch (const PrecisionExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPrecisionExhausted;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadArguments;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kBadArguments;
}
