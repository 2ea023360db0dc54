#pragma once

// Hecke orbits tau_gamma = (a tau + b) / d over C_N, the Mahler measure sum
// S_N(tau), Farey intervals and the hat-tau approximation used to bound
// sum log Im tilde-tau_gamma.

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "modpoly/arithfun.hpp"
#include "modpoly/halfplane.hpp"
#include "modpoly/real.hpp"
#include "modpoly/report.hpp"

namespace modpoly {

/// I_M(h/k) = [lo, hi), built from the mediants with the Farey neighbours of h/k.
struct FareyInterval {
  std::uint64_t h;
  std::uint64_t k;
  mpq_class lo;
  mpq_class hi;

  mpq_class center() const { return mpq_class(h, k); }
  bool contains(const mpq_class& x) const { return lo <= x && x < hi; }
};

/// Intervals for every h/k in the Farey sequence of order M with 0 < h/k <= 1,
/// ascending. They partition [1/(M+1), (M+2)/(M+1)).
std::vector<FareyInterval> farey_intervals(std::uint64_t m);
/// The interval containing x; throws std::out_of_range outside the union.
const FareyInterval& locate(const std::vector<FareyInterval>& intervals, const mpq_class& x);

struct OrbitPoint {
  IsogenyMatrix gamma;
  HalfPlanePoint tau_gamma;
  HalfPlanePoint tau_reduced;
  UnimodularMatrix reducer;  // reducer.apply(tau_gamma) == tau_reduced
};

struct HeckeOrbit {
  std::uint64_t n;
  HalfPlanePoint tau;
  std::vector<OrbitPoint> points;  // (d, b) order of enumerate_CN
};

/// Orbit of a floating point tau; reduction at P + 32 bits.
HeckeOrbit build_orbit(std::uint64_t n, const HalfPlanePoint& tau, Precision bits);

struct ExactOrbitPoint {
  IsogenyMatrix gamma;
  RationalPoint tau_gamma;
  RationalPoint tau_reduced;
  UnimodularMatrix reducer;
};

/// Orbit of a rational point, reduced exactly.
std::vector<ExactOrbitPoint> build_exact_orbit(std::uint64_t n, const RationalPoint& tau);

/// S_N(tau) = sum over C_N of log max{1, |j(tau_gamma)|}.
Real s_n(std::uint64_t n, const HalfPlanePoint& tau, Precision bits);
Real s_n(const HeckeOrbit& orbit, Precision bits);

/// Both sides of
///   S_N(tau) = sum log max{|Delta(tilde)|, |j Delta(tilde)|}
///            + 6 sum [log Im tilde - log Im tau_gamma] - psi(N) log|Delta(tau)|.
/// The left side uses the theta-only j; the right side uses Delta from the
/// pentagonal product and E4^3 for j Delta.
BoundReport sn_decomposition_check(std::uint64_t n, const HalfPlanePoint& tau, Precision bits);

struct HatTau {
  IsogenyMatrix gamma;       // with b already replaced by b + d when b/d < 1/(M+1)
  std::uint64_t m;           // floor(d / sqrt(N y))
  std::uint64_t h;
  std::uint64_t k;
  UnimodularMatrix delta;    // (s r; k -h) up to the final translation
  RationalPoint tau_gamma;   // (a i y + b) / d with the replaced b
  RationalPoint tau_hat;     // delta(tau_gamma), -1/2 < Re <= 1/2
  RationalPoint tau_reduced; // representative in F
};

/// floor(d / sqrt(N y)) decided exactly for rational y.
std::uint64_t hat_tau_order(std::uint64_t n, const mpq_class& y, std::uint64_t d);

/// Builds tau-hat for gamma in C_N with d >= sqrt(N y) at tau = i y.
/// Throws std::invalid_argument when d^2 < N y or y < 1.
HatTau hat_tau(std::uint64_t n, const mpq_class& y, const IsogenyMatrix& gamma);

struct SumAndBound {
  Real value;
  Real bound;
  std::size_t terms = 0;
};

/// sum over d >= sqrt(N y) of log Im tilde-tau_gamma and
/// (4.75 + 3.5 log 2 + (0.5 + log 2) / (2 sqrt N)) psi(N).
SumAndBound large_d_sum(std::uint64_t n, const mpq_class& y, Precision bits);
/// sum over d < sqrt(N y) of log Im tilde-tau_gamma and psi(N) (1/e + log y).
SumAndBound small_d_sum(std::uint64_t n, const mpq_class& y, Precision bits);

/// (1 / psi(N)) sum log Im tilde-tau_gamma for a floating tau.
Real mean_log_im(std::uint64_t n, const HalfPlanePoint& tau, Precision bits);
/// sum log Im tilde-tau_gamma as an exact element of Q log(primes); throws
/// std::invalid_argument if a reduced imaginary part does not fit 64-bit parts.
LogPrimeVector sum_log_im_exact(std::uint64_t n, const RationalPoint& tau);

}  // namespace modpoly
