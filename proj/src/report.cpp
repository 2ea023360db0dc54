#include "modpoly/report.hpp"

namespace modpoly {

namespace {

Real margin_of(const Real& lhs, const Real& rhs, Claim claim) {
  switch (claim) {
    case Claim::at_most:
      return rhs - lhs;
    case Claim::at_least:
      return lhs - rhs;
    case Claim::equal:
      return -abs(lhs - rhs);
  }
  return Real(lhs.precision());
}

}  // namespace

BoundReport make_report(std::string name, std::uint64_t n, const Real& lhs, const Real& rhs, Claim claim,
                        Precision bits, std::map<std::string, std::string> context) {
  BoundReport r;
  r.name = std::move(name);
  r.n = n;
  r.lhs = lhs;
  r.rhs = rhs;
  r.claim = claim;
  r.margin = margin_of(lhs, rhs, claim);
  const Real scale = max(max(abs(lhs), abs(rhs)), Real(1L, bits));
  r.tolerance = pow2(-static_cast<long>(bits / 4), bits) * scale;
  r.pass = r.margin >= -r.tolerance;
  r.context = std::move(context);
  return r;
}

BoundReport make_exact_report(std::string name, std::uint64_t n, const Real& lhs, const Real& rhs, Claim claim,
                              bool holds, std::map<std::string, std::string> context) {
  BoundReport r;
  r.name = std::move(name);
  r.n = n;
  r.lhs = lhs;
  r.rhs = rhs;
  r.claim = claim;
  r.margin = margin_of(lhs, rhs, claim);
  r.tolerance = Real(lhs.precision());
  r.pass = holds;
  r.context = std::move(context);
  return r;
}

const char* to_string(Claim claim) {
  switch (claim) {
    case Claim::at_most:
      return "<=";
    case Claim::at_least:
      return ">=";
    case Claim::equal:
      return "==";
  }
  return "?";
}

}  // namespace modpoly
