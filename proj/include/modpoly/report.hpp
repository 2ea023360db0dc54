#pragma once

// One checked inequality instance with both sides kept at full precision.

#include <cstdint>
#include <map>
#include <string>

#include "modpoly/real.hpp"

namespace modpoly {

enum class Claim {
  at_most,   // lhs <= rhs
  at_least,  // lhs >= rhs
  equal,     // lhs == rhs
};

struct BoundReport {
  std::string name;
  std::uint64_t n = 0;
  Real lhs;
  Real rhs;
  /// rhs - lhs for at_most, lhs - rhs for at_least, -|lhs - rhs| for equal.
  Real margin;
  Real tolerance;
  bool pass = false;
  Claim claim = Claim::at_most;
  /// Free-form parameters (tau, j_E, y, ...), kept sorted for stable output.
  std::map<std::string, std::string> context;
};

/// pass <=> margin >= -tolerance, tolerance = 2^{-P/4} max(|lhs|, |rhs|, 1).
BoundReport make_report(std::string name, std::uint64_t n, const Real& lhs, const Real& rhs, Claim claim,
                        Precision bits, std::map<std::string, std::string> context = {});

/// Report for a comparison decided exactly (rational or symbolic); the two
/// sides are still carried as reals for output.
BoundReport make_exact_report(std::string name, std::uint64_t n, const Real& lhs, const Real& rhs, Claim claim,
                              bool holds, std::map<std::string, std::string> context = {});

const char* to_string(Claim claim);

}  // namespace modpoly
