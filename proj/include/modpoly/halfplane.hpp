#pragma once

// Points of the upper half-plane, the SL2(Z) action, reduction to the
// standard fundamental domain F, and high-precision evaluation of the
// discriminant Delta, the Eisenstein series E4 and the j-invariant.
//
// F = { |tau| >= 1, -1/2 < Re tau <= 1/2, Re tau >= 0 when |tau| = 1 }.
// Delta is normalized as q prod (1 - q^n)^24 and E4 = 1 + 240 sum sigma_3(n) q^n,
// so j = E4^3 / Delta = 1/q + 744 + 196884 q + ...

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "modpoly/real.hpp"

namespace modpoly {

class ReductionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HalfPlanePoint {
 public:
  /// Throws std::domain_error unless im > 0.
  HalfPlanePoint(Real re, Real im);

  static HalfPlanePoint from_rational(const mpq_class& re, const mpq_class& im, Precision bits);
  static HalfPlanePoint i(Precision bits);
  /// rho = exp(i pi / 3) = 1/2 + i sqrt(3)/2
  static HalfPlanePoint rho(Precision bits);
  /// i * y
  static HalfPlanePoint imaginary(const Real& y);

  const Real& re() const { return re_; }
  const Real& im() const { return im_; }
  Precision precision_bits() const { return bits_; }
  Complex as_complex() const { return Complex(re_, im_); }

 private:
  Real re_;
  Real im_;
  Precision bits_;
};

/// A point of the upper half-plane with exact rational coordinates. The SL2(Z)
/// orbit of such a point stays rational, so it can be reduced exactly.
struct RationalPoint {
  mpq_class re;
  mpq_class im;

  HalfPlanePoint to_point(Precision bits) const { return HalfPlanePoint::from_rational(re, im, bits); }
  friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

/// (m11 m12; m21 m22) with determinant 1.
class UnimodularMatrix {
 public:
  /// Throws std::invalid_argument unless the determinant is 1.
  UnimodularMatrix(std::int64_t m11, std::int64_t m12, std::int64_t m21, std::int64_t m22);

  static UnimodularMatrix identity() { return {1, 0, 0, 1}; }
  /// tau -> -1/tau
  static UnimodularMatrix S() { return {0, -1, 1, 0}; }
  /// tau -> tau + n
  static UnimodularMatrix T(std::int64_t n = 1) { return {1, n, 0, 1}; }

  std::int64_t m11() const { return m11_; }
  std::int64_t m12() const { return m12_; }
  std::int64_t m21() const { return m21_; }
  std::int64_t m22() const { return m22_; }

  HalfPlanePoint apply(const HalfPlanePoint& tau) const;
  RationalPoint apply(const RationalPoint& tau) const;
  /// m21 tau + m22
  Complex automorphy_factor(const HalfPlanePoint& tau) const;
  /// Same transformation up to sign (g and -g act identically).
  bool same_action(const UnimodularMatrix& other) const;

  friend UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b);
  friend bool operator==(const UnimodularMatrix&, const UnimodularMatrix&) = default;

 private:
  std::int64_t m11_, m12_, m21_, m22_;
};

struct PrecisionPolicy {
  Precision base_bits = 256;
  /// Multiplier applied on each retry, as the rational retry_num / retry_den.
  long retry_num = 2;
  long retry_den = 1;
  int max_retries = 3;

  /// Throws std::invalid_argument on base_bits < 64 or a factor <= 1.
  void validate() const;
  Precision bits_for_attempt(int attempt) const;
};

struct Reduction {
  HalfPlanePoint point;
  UnimodularMatrix transform;  // transform.apply(original) == point
};

struct RationalReduction {
  RationalPoint point;
  UnimodularMatrix transform;
};

/// Reduces tau into F at its own precision. Boundary ties are resolved with
/// tolerance 2^(-P/2). Throws ReductionError when the number of inversions
/// exceeds a bound of order log(1/Im tau).
Reduction reduce_to_F(const HalfPlanePoint& tau);
/// Same, with an explicit cap on the number of inversions (> 0).
Reduction reduce_to_F(const HalfPlanePoint& tau, long max_inversions);
/// Exact reduction of a rational point; ties are decided exactly.
RationalReduction reduce_to_F(const RationalPoint& tau);
RationalReduction reduce_to_F(const RationalPoint& tau, long max_inversions);

bool in_fundamental_domain(const RationalPoint& tau);

/// Number of q-exponents kept by the series at the given imaginary part:
/// ceil((P + 32) / (2 pi Im(tau) log2 e)) + 16. For Im tau = sqrt(3)/2 this is
/// ceil((P + 32) / (pi sqrt(3) log2 e)) + 16.
long series_terms(Precision bits, double im_tau);

/// Delta, E4 and j at one point, all evaluated at a point of F.
struct ModularValues {
  Complex delta;
  Complex e4;
  Complex j;
};

/// Evaluates at tau, which must satisfy Im tau >= sqrt(3)/2 - 2^-20 (no reduction).
ModularValues modular_values_near_cusp(const HalfPlanePoint& tau, Precision bits);

/// j alone at a point with Im tau >= sqrt(3)/2 - 2^-20, from the theta
/// series only (no pentagonal product); the fast path for bulk evaluation.
Complex j_near_cusp(const HalfPlanePoint& tau, Precision bits);

/// Delta(tau) for any tau in H; points below the line Im = sqrt(3)/2 are
/// reduced first and the weight-12 factor is applied.
Complex delta(const HalfPlanePoint& tau, Precision bits);
/// E4(tau) for any tau in H (weight-4 factor applied after reduction).
Complex eisenstein_e4(const HalfPlanePoint& tau, Precision bits);
/// j(tau) = E4^3 / Delta, evaluated at the reduced point.
Complex j_value(const HalfPlanePoint& tau, Precision bits);

/// f(tau) = log max{|Delta(tau)|, |j(tau) Delta(tau)|} = log max{|Delta|, |E4|^3}.
Real f_of(const HalfPlanePoint& tau, Precision bits);
/// log(|Delta(tau)| (Im tau)^6), an SL2(Z)-invariant quantity.
Real log_delta_im6(const HalfPlanePoint& tau, Precision bits);

/// Closed forms of the two special values of Delta.
/// Delta(rho) = -3^3 Gamma(1/3)^36 / (2 pi)^24
Real delta_rho_closed_form(Precision bits);
/// Delta(i) = Gamma(1/4)^24 / (2^24 pi^18)
Real delta_i_closed_form(Precision bits);
/// f(i) = log(3^3 Gamma(1/4)^24 / (2^18 pi^18))
Real f_i_closed_form(Precision bits);
/// The integral of dt / sqrt(1 - t^4) over [0, 1], by tanh-sinh quadrature.
Real lemniscate_integral(Precision bits);
/// Delta(i) = 2^18 / (2 pi)^12 * (lemniscate integral)^12
Real delta_i_from_lemniscate(Precision bits);

struct ContourExtrema {
  Real min;
  HalfPlanePoint argmin;
  Real max;
  HalfPlanePoint argmax;
  /// Sample counts on the arc C, the line L and the curve |j| = 1.
  std::size_t arc_samples = 0;
  std::size_t line_samples = 0;
  std::size_t curve_samples = 0;
};

/// Scans f over the arc C (|tau| = 1 from rho to i), the line L (Re tau = 1/2,
/// sqrt(3)/2 <= Im tau <= 4) and the curve |j| = 1 around rho, then refines
/// the best samples by golden-section search. Throws std::invalid_argument for
/// density < 1000 and ReductionError when the |j| = 1 curve cannot be bracketed.
ContourExtrema contour_extrema(std::size_t density, Precision bits);

/// tau in F with j(tau) = j0 for real j0: on the imaginary axis for
/// j0 >= 1728, on the arc for 0 <= j0 < 1728, on Re tau = 1/2 for j0 < 0.
HalfPlanePoint inverse_j_real(const Real& j0, Precision bits);

}  // namespace modpoly
