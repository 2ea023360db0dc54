#pragma once

// Integer polynomials in one variable: exact gcd and square-free
// decomposition, certified root enclosures and the Mahler measure.

#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "modpoly/real.hpp"

namespace modpoly {

/// Ascending coefficients; the zero polynomial is the empty vector and no
/// other value has a zero leading coefficient once normalized.
using IntPoly = std::vector<mpz_class>;

IntPoly normalized(IntPoly p);
/// Degree of a normalized nonzero polynomial; -1 for zero.
long degree_of(const IntPoly& p);
IntPoly derivative(const IntPoly& p);
mpz_class content(const IntPoly& p);
/// p / content(p) with a positive leading coefficient.
IntPoly primitive_part(const IntPoly& p);
/// a / b when b divides a in Z[x]; std::nullopt otherwise.
std::optional<IntPoly> divide_exact(const IntPoly& a, const IntPoly& b);
/// Primitive gcd with positive leading coefficient; {1} when coprime.
IntPoly poly_gcd(const IntPoly& a, const IntPoly& b);

struct SquareFreeFactor {
  IntPoly factor;  // primitive, square-free, positive leading coefficient
  unsigned multiplicity;
};

/// Yun's algorithm: primitive_part(p) = prod factor^multiplicity, factors
/// pairwise coprime and of positive degree.
std::vector<SquareFreeFactor> square_free_decomposition(const IntPoly& p);

class RootIsolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RootEnclosure {
  Complex center;
  Real radius;  // exactly one root of the polynomial lies in the closed disk
};

/// Roots of a square-free polynomial of positive degree. Aberth iteration
/// from Newton-polygon starting points, refined up to `bits`, then certified:
/// the disks of radius n |p(z_k) / (lead prod_{l != k} (z_k - z_l))| are
/// pairwise disjoint and each holds one root. Throws RootIsolationError when
/// the iteration stalls or the disks overlap.
std::vector<RootEnclosure> isolate_roots(const IntPoly& square_free, Precision bits);

/// m(p) = log|lead| + sum log max{1, |root|} over roots with multiplicity.
/// Retries root isolation at doubled precision (three times) until the
/// enclosure error is below 2^{-bits/2}; `error_bound` receives that error.
/// Throws std::invalid_argument for p = 0 and RootIsolationError if no
/// attempt certifies.
Real mahler_measure(const IntPoly& p, Precision bits, Real* error_bound = nullptr);

/// log of the sum of |coefficients|, an upper bound for the Mahler measure.
Real log_length(const IntPoly& p, Precision bits);

}  // namespace modpoly
