#pragma once

// The classical modular polynomial Phi_N(X, Y) by evaluation at Hecke orbits
// and interpolation in Y, rounded to integers under a residual certificate.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "modpoly/halfplane.hpp"
#include "modpoly/real.hpp"

namespace modpoly {

/// Every attempt allowed by the policy left a residual >= 2^-32 or an
/// asymmetric matrix.
class PrecisionExhausted : public std::runtime_error {
 public:
  PrecisionExhausted(std::uint64_t n, Precision last_bits, const std::string& reason);
  std::uint64_t n;
  Precision last_bits;
};

struct ModularPolynomial {
  std::uint64_t n = 0;
  /// coeffs[i][j] is the coefficient of X^i Y^j; (psi + 1) x (psi + 1).
  std::vector<std::vector<mpz_class>> coeffs;
  /// max |computed - rounded| over all coefficients.
  Real residual;
  /// max |c_ij - c_ji| before rounding (0 for N = 1, which is antisymmetric).
  Real asymmetry;
  Precision precision_used = 0;

  std::uint64_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  bool is_symmetric() const;
  /// X^psi Y^0 has coefficient 1 and X^psi Y^j vanishes for j > 0.
  bool is_monic_in_x() const;
  friend bool operator==(const ModularPolynomial& a, const ModularPolynomial& b) {
    return a.n == b.n && a.coeffs == b.coeffs;
  }
};

struct HeightValue {
  Real value;  // natural log of the largest |coefficient|
  std::size_t i = 0;
  std::size_t j = 0;
};

struct EngineConfig {
  std::uint64_t psi_ceiling = 200;
  /// Worker threads for node evaluation and row interpolation.
  unsigned jobs = 1;
};

/// Wall-clock split of one compute_phi call, in seconds.
struct EngineTimings {
  double orbits = 0;
  double products = 0;
  double interpolation = 0;
  int attempts = 0;
};

/// ceil(1.2 * 6 psi (log N - 2 lambda_N + 9.5387) / log 2) + 16 psi + 256.
Precision phi_base_bits(std::uint64_t n);
/// phi_base_bits(n) doubling on each retry, three retries.
PrecisionPolicy phi_policy(std::uint64_t n);

/// Throws std::invalid_argument for N = 0 or psi(N) above the ceiling and
/// PrecisionExhausted when no attempt certifies.
ModularPolynomial compute_phi(std::uint64_t n, const PrecisionPolicy& policy, const EngineConfig& config = {},
                              EngineTimings* timings = nullptr);
ModularPolynomial compute_phi(std::uint64_t n);

/// One uncertified attempt at a fixed precision; residual and asymmetry are
/// filled in but not checked.
ModularPolynomial compute_phi_at(std::uint64_t n, Precision bits, const EngineConfig& config = {},
                                 EngineTimings* timings = nullptr);

/// Largest coefficient compared exactly; the log is taken at `bits`. The
/// witness is the first maximum in (i, j) order.
HeightValue height(const ModularPolynomial& phi, Precision bits = 128);

/// Phi_N(X, y0) as ascending integer coefficients.
std::vector<mpz_class> specialize_y(const ModularPolynomial& phi, const mpz_class& y0);

/// |Phi_N(j(tau), j(N tau))| divided by the largest monomial |c_ij j(tau)^i j(N tau)^j|.
Real vanishing_ratio(const ModularPolynomial& phi, const HalfPlanePoint& tau, Precision bits);

/// PHIMAT v1: header, one "i j c" line per nonzero coefficient with i <= j in
/// (i, j) order, then "residual <decimal>". Phi_1 = X - Y is stored as its
/// single entry "0 1 -1" and restored antisymmetrically.
void write_phimat(std::ostream& out, const ModularPolynomial& phi);
/// Throws std::runtime_error on any malformed or inconsistent input.
ModularPolynomial read_phimat(std::istream& in);

}  // namespace modpoly
