#include "dpw/symmetry.hpp"

namespace dpw {

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(s));
    long long num = std::stoll(s.substr(0, slash));
    long long den = std::stoll(s.substr(slash + 1));
    return Rational(num, den);
  } catch (const std::exception&) {
    throw SymmetryError("bad rational literal: " + s);
  }
}

static BranchDatum branch_datum(int d) {
  BranchDatum b;
  b.order = d;
  b.weight_lower = Rational(d - 1, 2 * d);
  b.weight_upper = Rational(d + 1, 2 * d);
  b.rho = Rational(1, 2 * d);
  return b;
}

BranchData branch_data(const SurfaceParams& p) {
  if (p.k < 2 || p.l < 2)
    throw SymmetryError("surface parameters require k >= 2 and l >= 2, got k=" +
                        std::to_string(p.k) + " l=" + std::to_string(p.l));
  // punctures 1 and 2 carry the order-k ramification, punctures 3 and 4 the
  // order-l one
  return {branch_datum(p.k), branch_datum(p.k), branch_datum(p.l), branch_datum(p.l)};
}

bool below_validated_range(const SurfaceParams& p) { return p.k < 3 || p.l < 3; }

long genus(const SurfaceParams& p) {
  branch_data(p);  // range check
  return static_cast<long>(p.k - 1) * static_cast<long>(p.l - 1);
}

long rh_genus(const SurfaceParams& p) {
  branch_data(p);
  // degree kl covering of the sphere, two fibers of l points with
  // multiplicity k and two fibers of k points with multiplicity l
  long kl = static_cast<long>(p.k) * p.l;
  long two_g_minus_2 = -2 * kl + 2 * p.l * (p.k - 1) + 2 * p.k * (p.l - 1);
  if (two_g_minus_2 % 2 != 0) throw SymmetryError("ramification count is odd");
  return two_g_minus_2 / 2 + 1;
}

GeneratorData canonical_generators(const SurfaceParams& p) {
  branch_data(p);
  GeneratorData g;
  g[0] = {Rational(p.k + 1, 2 * p.k), 1};
  g[1] = {Rational(p.k - 1, 2 * p.k), 1};
  g[2] = {Rational(p.l + 1, 2 * p.l), 1};
  g[3] = {Rational(p.l - 1, 2 * p.l), 1};
  return g;
}

RelationCheck generator_relation_check(const GeneratorData& g) {
  RelationCheck rc;
  Rational sum(0);
  int sign_product = 1;
  for (const auto& gen : g) {
    sum += gen.angle;
    if (gen.sign_lift != 1 && gen.sign_lift != -1)
      throw SymmetryError("sign lift must be +1 or -1");
    sign_product *= gen.sign_lift;
  }
  Rational doubled = sum * 2;
  rc.base_closed = (doubled.denominator() == 1);
  // product of sign * exp(2 pi i angle) equals +1 iff either all of the
  // angle sum is integral and the signs multiply to +1, or the angle sum is
  // a half-integer and the signs multiply to -1
  // compare rationals against Rational values only: the mixed-type
  // comparison operators recurse under c++20 rewritten candidates
  Rational frac = sum - Rational(sum.numerator() / sum.denominator());
  if (frac < Rational(0)) frac += Rational(1);
  rc.lift_closed = (sign_product == 1 && frac == Rational(0)) ||
                   (sign_product == -1 && frac == Rational(1, 2));
  return rc;
}

Rational parabolic_degree_of(const BranchData& b) {
  Rational deg(0);
  for (const auto& d : b) deg -= d.weight_lower + d.weight_upper;
  return deg;
}

}  // namespace dpw
