#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace dpw {

using Rational = boost::rational<long long>;

std::string to_string(const Rational& r);   // "2/3", "-1/6", "4"
Rational rational_from_string(const std::string& s);

struct SymmetryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Orders (k,l) of the two cyclic rotation factors acting on the surface.
struct SurfaceParams {
  int k = 0;
  int l = 0;
};

/// Per-puncture branch datum of the quotient sphere: ramification order d,
/// the two parabolic weights (summing to 1) and the traceless residue
/// eigenvalue rho = 1/(2d).
struct BranchDatum {
  int order = 0;
  Rational weight_lower;   // (d-1)/(2d)
  Rational weight_upper;   // (d+1)/(2d)
  Rational rho;            // 1/(2d)
};

using BranchData = std::array<BranchDatum, 4>;

/// One lifted symmetry generator: rotation angle 2*pi*angle of its first
/// SU(2)-factor eigenvalue plus the sign of the binary lift.
struct GeneratorDatum {
  Rational angle;
  int sign_lift = 1;   // +1 or -1
};

using GeneratorData = std::array<GeneratorDatum, 4>;

// throws SymmetryError unless 2 <= k, l; flags_below_range reports k or l < 3
BranchData branch_data(const SurfaceParams& p);
bool below_validated_range(const SurfaceParams& p);

/// Genus of the covering surface, (k-1)(l-1).
long genus(const SurfaceParams& p);

/// Genus recomputed through the degree/ramification count of the
/// 4-point branched covering; must agree with genus().
long rh_genus(const SurfaceParams& p);

/// Canonical lifted generator data for (k,l): angles
/// (k+1)/2k, (k-1)/2k, (l+1)/2l, (l-1)/2l with positive sign lifts.
GeneratorData canonical_generators(const SurfaceParams& p);

/// Exact closure test. Base relation: the doubled angles must sum to an
/// integer (the product of the four base rotations is the identity).
/// Lifted relation: the product of sign_lift * exp(2*pi*i*angle) over the
/// four generators must equal +1.
struct RelationCheck {
  bool base_closed = false;
  bool lift_closed = false;
  bool ok() const { return base_closed && lift_closed; }
};
RelationCheck generator_relation_check(const GeneratorData& g);

/// Sum of all parabolic weights, negated: the degree of the parabolic
/// bundle underlying any admissible potential. Equals -4 for every (k,l).
Rational parabolic_degree_of(const BranchData& b);

}  // namespace dpw
