#pragma once

// Exact arithmetic functions of the isogeny degree N: Dedekind psi, the
// lambda/kappa correction terms as exact combinations of log p, the cusp
// count psi~, the genus of X_0(N), and the set C_N of upper-triangular
// matrices that parametrize cyclic N-isogenies.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "modpoly/real.hpp"

namespace modpoly {

struct PrimePower {
  std::uint64_t prime;
  unsigned exponent;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// A positive integer together with its prime factorization, primes
/// strictly increasing.
class FactoredInteger {
 public:
  /// Trusted constructor; validates the invariants and throws std::invalid_argument.
  FactoredInteger(std::uint64_t value, std::vector<PrimePower> factors);

  std::uint64_t value() const { return value_; }
  const std::vector<PrimePower>& factors() const { return factors_; }
  unsigned exponent_of(std::uint64_t prime) const;

 private:
  std::uint64_t value_;
  std::vector<PrimePower> factors_;
};

/// Trial division to 10^6, then Miller-Rabin and Pollard-Brent for the cofactor.
FactoredInteger factor(std::uint64_t n);
bool is_prime(std::uint64_t n);

std::uint64_t psi(const FactoredInteger& n);
std::uint64_t euler_phi(const FactoredInteger& n);
std::uint64_t euler_phi(std::uint64_t n);
std::uint64_t divisor_count(const FactoredInteger& n);
std::vector<std::uint64_t> divisors(const FactoredInteger& n);

/// psi~(N) = sum_{d|N} phi(gcd(d, N/d)) via the prime-power closed forms.
std::uint64_t psi_tilde(const FactoredInteger& n);
/// The same quantity summed directly over divisors.
std::uint64_t psi_tilde_direct(std::uint64_t n);
/// phi(sqrt(N)) when N is a perfect square, 0 otherwise.
std::uint64_t phi_of_sqrt(std::uint64_t n);

/// Number of elliptic points of order 2 and 3 on X_0(N).
std::uint64_t elliptic_points_order2(const FactoredInteger& n);
std::uint64_t elliptic_points_order3(const FactoredInteger& n);
std::uint64_t genus_X0(const FactoredInteger& n);

/// An exact element sum_p c_p log p with rational c_p. Zero coefficients are
/// never stored, so equality of vectors is equality of the real numbers.
class LogPrimeVector {
 public:
  LogPrimeVector() = default;

  /// log n for a positive integer.
  static LogPrimeVector log_of(std::uint64_t n);
  /// log q for a positive rational whose numerator and denominator fit in 64 bits.
  static LogPrimeVector log_of(const mpq_class& q);

  void add(std::uint64_t prime, const mpq_class& coefficient);
  mpq_class coefficient(std::uint64_t prime) const;
  const std::map<std::uint64_t, mpq_class>& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }

  LogPrimeVector& operator+=(const LogPrimeVector& rhs);
  LogPrimeVector& operator-=(const LogPrimeVector& rhs);
  LogPrimeVector& operator*=(const mpq_class& scale);
  friend LogPrimeVector operator+(LogPrimeVector a, const LogPrimeVector& b) { return a += b; }
  friend LogPrimeVector operator-(LogPrimeVector a, const LogPrimeVector& b) { return a -= b; }
  friend LogPrimeVector operator*(LogPrimeVector a, const mpq_class& s) { return a *= s; }
  friend LogPrimeVector operator*(const mpq_class& s, LogPrimeVector a) { return a *= s; }
  friend bool operator==(const LogPrimeVector& a, const LogPrimeVector& b) { return a.entries_ == b.entries_; }

  Real evaluate(Precision bits) const;
  /// "{2: 1/2, 3: 1/4}"
  std::string to_string() const;
  friend std::ostream& operator<<(std::ostream& out, const LogPrimeVector& v);

 private:
  std::map<std::uint64_t, mpq_class> entries_;
};

/// lambda_N = sum_{p^e || N} (p^e - 1) / (p^(e-1) (p^2 - 1)) log p
LogPrimeVector lambda_vector(const FactoredInteger& n);
/// kappa_N = sum_{p | N} log p / p
LogPrimeVector kappa_vector(const FactoredInteger& n);

/// A matrix (a b; 0 d) of C_N.
struct IsogenyMatrix {
  std::uint64_t a;
  std::uint64_t b;
  std::uint64_t d;

  std::uint64_t degree() const { return a * d; }
  friend bool operator==(const IsogenyMatrix&, const IsogenyMatrix&) = default;
};

/// Every (a, b, d) with ad = N, 0 <= b < d, gcd(a, b, d) = 1, sorted by (d, b).
std::vector<IsogenyMatrix> enumerate_CN(std::uint64_t n);

/// Both sides of sum_{C_N} log(d/a) = psi(N)(log N - 2 lambda_N). The left side
/// is accumulated over an enumeration of C_N, the right side from the closed form.
std::pair<LogPrimeVector, LogPrimeVector> autissier_identity(std::uint64_t n);

}  // namespace modpoly
