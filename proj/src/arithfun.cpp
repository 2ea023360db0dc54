#include "modpoly/arithfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace modpoly {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr u64 kTrialLimit = 1'000'000;

u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 pow_mod(u64 base, u64 e, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (e > 0) {
    if (e & 1U) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    e >>= 1U;
  }
  return result;
}

u64 ipow(u64 base, unsigned e) {
  u64 r = 1;
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

// Pollard-Brent; n is odd, composite, and has no prime factor below kTrialLimit.
u64 pollard_brent(u64 n) {
  for (u64 c = 1;; ++c) {
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    const u64 m = 128;
    u64 r = 1;
    auto f = [&](u64 v) { return (mul_mod(v, v, n) + c) % n; };
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      do {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split_cofactor(u64 n, std::map<u64, unsigned>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    ++out[n];
    return;
  }
  const u64 f = pollard_brent(n);
  split_cofactor(f, out);
  split_cofactor(n / f, out);
}

int kronecker_minus1(u64 p) { return p == 2 ? 0 : (p % 4 == 1 ? 1 : -1); }

int kronecker_minus3(u64 p) {
  if (p == 3) return 0;
  if (p == 2) return -1;
  return p % 3 == 1 ? 1 : -1;
}

}  // namespace

FactoredInteger::FactoredInteger(std::uint64_t value, std::vector<PrimePower> factors)
    : value_(value), factors_(std::move(factors)) {
  if (value_ == 0) throw std::invalid_argument("FactoredInteger: value must be positive");
  u128 product = 1;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto& pp = factors_[i];
    if (pp.exponent == 0) throw std::invalid_argument("FactoredInteger: zero exponent");
    if (i > 0 && factors_[i - 1].prime >= pp.prime) {
      throw std::invalid_argument("FactoredInteger: primes must be strictly increasing");
    }
    for (unsigned e = 0; e < pp.exponent; ++e) product *= pp.prime;
    if (product > value_) throw std::invalid_argument("FactoredInteger: product exceeds value");
  }
  if (product != value_) throw std::invalid_argument("FactoredInteger: product mismatch");
}

unsigned FactoredInteger::exponent_of(std::uint64_t prime) const {
  for (const auto& pp : factors_) {
    if (pp.prime == prime) return pp.exponent;
  }
  return 0;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  // This witness set is deterministic for every 64-bit n.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

FactoredInteger factor(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("factor: n must be positive");
  std::vector<PrimePower> factors;
  u64 rest = n;
  for (u64 p = 2; p <= kTrialLimit && p * p <= rest; p += (p == 2 ? 1 : 2)) {
    if (rest % p != 0) continue;
    unsigned e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    factors.push_back({p, e});
  }
  if (rest > 1) {
    std::map<u64, unsigned> large;
    if (rest <= kTrialLimit * kTrialLimit || is_prime(rest)) {
      ++large[rest];
    } else {
      split_cofactor(rest, large);
    }
    for (const auto& [p, e] : large) factors.push_back({p, e});
  }
  return FactoredInteger(n, std::move(factors));
}

std::uint64_t psi(const FactoredInteger& n) {
  u64 result = 1;
  for (const auto& [p, e] : n.factors()) result *= ipow(p, e - 1) * (p + 1);
  return result;
}

std::uint64_t euler_phi(const FactoredInteger& n) {
  u64 result = 1;
  for (const auto& [p, e] : n.factors()) result *= ipow(p, e - 1) * (p - 1);
  return result;
}

std::uint64_t euler_phi(std::uint64_t n) { return euler_phi(factor(n)); }

std::uint64_t divisor_count(const FactoredInteger& n) {
  u64 result = 1;
  for (const auto& pp : n.factors()) result *= pp.exponent + 1;
  return result;
}

std::vector<std::uint64_t> divisors(const FactoredInteger& n) {
  std::vector<u64> out{1};
  for (const auto& [p, e] : n.factors()) {
    const std::size_t base = out.size();
    u64 power = 1;
    for (unsigned i = 1; i <= e; ++i) {
      power *= p;
      for (std::size_t j = 0; j < base; ++j) out.push_back(out[j] * power);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t psi_tilde(const FactoredInteger& n) {
  u64 result = 1;
  for (const auto& [p, k] : n.factors()) {
    if (k % 2 == 1) {
      result *= 2 * ipow(p, k / 2);
    } else {
      result *= ipow(p, k / 2 - 1) + ipow(p, k / 2);
    }
  }
  return result;
}

std::uint64_t psi_tilde_direct(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("psi_tilde_direct: n must be positive");
  u64 total = 0;
  for (u64 d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    const u64 term = euler_phi(std::gcd(d, n / d));
    total += term;
    if (d * d != n) total += term;  // the cofactor n/d gives the same gcd
  }
  return total;
}

std::uint64_t phi_of_sqrt(std::uint64_t n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r * r == n ? euler_phi(r) : 0;
}

std::uint64_t elliptic_points_order2(const FactoredInteger& n) {
  if (n.exponent_of(2) >= 2) return 0;
  u64 result = 1;
  for (const auto& pp : n.factors()) result *= static_cast<u64>(1 + kronecker_minus1(pp.prime));
  return result;
}

std::uint64_t elliptic_points_order3(const FactoredInteger& n) {
  if (n.exponent_of(3) >= 2) return 0;
  u64 result = 1;
  for (const auto& pp : n.factors()) result *= static_cast<u64>(1 + kronecker_minus3(pp.prime));
  return result;
}

std::uint64_t genus_X0(const FactoredInteger& n) {
  // 12 g = 12 + psi - 3 nu2 - 4 nu3 - 6 nu_inf, nu_inf = psi~ (number of cusps)
  const auto twelve_g = static_cast<std::int64_t>(12 + psi(n)) -
                        3 * static_cast<std::int64_t>(elliptic_points_order2(n)) -
                        4 * static_cast<std::int64_t>(elliptic_points_order3(n)) -
                        6 * static_cast<std::int64_t>(psi_tilde(n));
  if (twelve_g < 0 || twelve_g % 12 != 0) {
    throw std::logic_error("genus_X0: non-integral genus for N=" + std::to_string(n.value()));
  }
  return static_cast<u64>(twelve_g / 12);
}

LogPrimeVector LogPrimeVector::log_of(std::uint64_t n) {
  LogPrimeVector v;
  const FactoredInteger fn = factor(n);
  for (const auto& [p, e] : fn.factors()) v.add(p, mpq_class(e));
  return v;
}

LogPrimeVector LogPrimeVector::log_of(const mpq_class& q) {
  if (sgn(q) <= 0) throw std::invalid_argument("LogPrimeVector::log_of: non-positive rational");
  if (!q.get_num().fits_ulong_p() || !q.get_den().fits_ulong_p()) {
    throw std::invalid_argument("LogPrimeVector::log_of: rational exceeds 64 bits");
  }
  return log_of(q.get_num().get_ui()) - log_of(q.get_den().get_ui());
}

void LogPrimeVector::add(std::uint64_t prime, const mpq_class& coefficient) {
  if (sgn(coefficient) == 0) return;
  auto [it, inserted] = entries_.try_emplace(prime, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (sgn(it->second) == 0) entries_.erase(it);
  }
}

mpq_class LogPrimeVector::coefficient(std::uint64_t prime) const {
  auto it = entries_.find(prime);
  return it == entries_.end() ? mpq_class(0) : it->second;
}

LogPrimeVector& LogPrimeVector::operator+=(const LogPrimeVector& rhs) {
  for (const auto& [p, c] : rhs.entries_) add(p, c);
  return *this;
}

LogPrimeVector& LogPrimeVector::operator-=(const LogPrimeVector& rhs) {
  for (const auto& [p, c] : rhs.entries_) add(p, -c);
  return *this;
}

LogPrimeVector& LogPrimeVector::operator*=(const mpq_class& scale) {
  if (sgn(scale) == 0) {
    entries_.clear();
    return *this;
  }
  for (auto& [p, c] : entries_) c *= scale;
  return *this;
}

Real LogPrimeVector::evaluate(Precision bits) const {
  Real total(bits + 16);
  for (const auto& [p, c] : entries_) {
    total += modpoly::log_of(mpz_class(static_cast<unsigned long>(p)), bits + 16) * Real(c, bits + 16);
  }
  return total.with_precision(bits);
}

std::ostream& operator<<(std::ostream& out, const LogPrimeVector& v) { return out << v.to_string(); }

std::string LogPrimeVector::to_string() const {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (const auto& [p, c] : entries_) {
    if (!first) out << ", ";
    first = false;
    out << p << ": " << c.get_str();
  }
  out << '}';
  return out.str();
}

LogPrimeVector lambda_vector(const FactoredInteger& n) {
  LogPrimeVector v;
  for (const auto& [p, e] : n.factors()) {
    const mpz_class prime(static_cast<unsigned long>(p));
    mpq_class c(mpz_class(static_cast<unsigned long>(ipow(p, e))) - 1,
                mpz_class(static_cast<unsigned long>(ipow(p, e - 1))) * (prime * prime - 1));
    c.canonicalize();
    v.add(p, c);
  }
  return v;
}

LogPrimeVector kappa_vector(const FactoredInteger& n) {
  LogPrimeVector v;
  for (const auto& pp : n.factors()) {
    v.add(pp.prime, mpq_class(1, static_cast<unsigned long>(pp.prime)));
  }
  return v;
}

std::vector<IsogenyMatrix> enumerate_CN(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("enumerate_CN: N must be positive");
  std::vector<IsogenyMatrix> out;
  for (u64 d : divisors(factor(n))) {
    const u64 a = n / d;
    const u64 r = std::gcd(a, d);
    for (u64 b = 0; b < d; ++b) {
      if (std::gcd(b, r) == 1) out.push_back({a, b, d});
    }
  }
  return out;
}

std::pair<LogPrimeVector, LogPrimeVector> autissier_identity(std::uint64_t n) {
  const FactoredInteger fn = factor(n);

  // Left side: walk C_N divisor by divisor, counting admissible b, and add
  // count * (log d - log a) with log d, log a read off the factorization of N.
  LogPrimeVector lhs;
  for (u64 d : divisors(fn)) {
    const u64 a = n / d;
    const u64 r = std::gcd(a, d);
    u64 count = 0;
    for (u64 b = 0; b < d; ++b) {
      if (std::gcd(b, r) == 1) ++count;
    }
    for (const auto& [p, e] : fn.factors()) {
      unsigned ed = 0;
      for (u64 rest = d; rest % p == 0; rest /= p) ++ed;
      const long coefficient = 2 * static_cast<long>(ed) - static_cast<long>(e);
      lhs.add(p, mpq_class(static_cast<long>(count) * coefficient));
    }
  }

  LogPrimeVector rhs = LogPrimeVector::log_of(n);
  rhs -= lambda_vector(fn) * mpq_class(2);
  rhs *= mpq_class(static_cast<unsigned long>(psi(fn)));
  return {std::move(lhs), std::move(rhs)};
}

}  // namespace modpoly
