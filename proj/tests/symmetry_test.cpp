#include <doctest.h>

#include "dpw/symmetry.hpp"

using dpw::Rational;

TEST_SUITE("symmetry") {

TEST_CASE("rational strings round trip") {
  CHECK(dpw::to_string(Rational(2, 3)) == "2/3");
  CHECK(dpw::to_string(Rational(-1, 6)) == "-1/6");
  CHECK(dpw::to_string(Rational(4)) == "4");
  for (const char* s : {"2/3", "-1/6", "4", "0", "-7/2"})
    CHECK(dpw::to_string(dpw::rational_from_string(s)) == s);
  CHECK(dpw::rational_from_string("6/4") == Rational(3, 2));
}

TEST_CASE("branch data of the genus 4 surface") {
  const dpw::BranchData b = dpw::branch_data({3, 3});
  for (int j = 0; j < 4; ++j) {
    CHECK(b[j].order == 3);
    CHECK(b[j].weight_lower == Rational(1, 3));
    CHECK(b[j].weight_upper == Rational(2, 3));
    CHECK(b[j].rho == Rational(1, 6));
  }
  CHECK(dpw::genus({3, 3}) == 4);
  CHECK(dpw::rh_genus({3, 3}) == 4);
  CHECK(dpw::parabolic_degree_of(b) == Rational(-4));
  CHECK_FALSE(dpw::below_validated_range({3, 3}));
}

TEST_CASE("branch data of the (4,5) surface") {
  const dpw::BranchData b = dpw::branch_data({4, 5});
  CHECK(b[0].order == 4);
  CHECK(b[1].order == 4);
  CHECK(b[2].order == 5);
  CHECK(b[3].order == 5);
  CHECK(b[0].weight_lower == Rational(3, 8));
  CHECK(b[0].weight_upper == Rational(5, 8));
  CHECK(b[2].weight_lower == Rational(2, 5));
  CHECK(b[2].weight_upper == Rational(3, 5));
  CHECK(b[0].rho == Rational(1, 8));
  CHECK(b[2].rho == Rational(1, 10));
  CHECK(dpw::genus({4, 5}) == 12);
  CHECK(dpw::rh_genus({4, 5}) == 12);
}

TEST_CASE("torus case flags the validated-range boundary") {
  CHECK(dpw::genus({2, 2}) == 1);
  CHECK(dpw::below_validated_range({2, 2}));
  CHECK(dpw::below_validated_range({2, 7}));
  CHECK_FALSE(dpw::below_validated_range({3, 4}));
}

TEST_CASE("orders below two are rejected") {
  CHECK_THROWS_AS(dpw::branch_data({1, 3}), dpw::SymmetryError);
  CHECK_THROWS_AS(dpw::branch_data({3, 0}), dpw::SymmetryError);
  CHECK_THROWS_AS(dpw::genus({-2, 5}), dpw::SymmetryError);
}

TEST_CASE("weights sum to one and both genus counts agree on a grid") {
  for (int k = 2; k <= 12; ++k)
    for (int l = 2; l <= 12; ++l) {
      const dpw::BranchData b = dpw::branch_data({k, l});
      for (const auto& d : b) {
        CHECK(d.weight_lower + d.weight_upper == Rational(1));
        CHECK(d.rho * 2 * d.order == Rational(1));
        CHECK(d.weight_lower < d.weight_upper);
      }
      CHECK(dpw::genus({k, l}) == long(k - 1) * (l - 1));
      CHECK(dpw::rh_genus({k, l}) == dpw::genus({k, l}));
      CHECK(dpw::parabolic_degree_of(b) == Rational(-4));
    }
}

TEST_CASE("canonical generators satisfy both closure relations") {
  for (int k = 2; k <= 9; ++k)
    for (int l = 2; l <= 9; ++l) {
      const dpw::GeneratorData g = dpw::canonical_generators({k, l});
      CHECK(g[0].angle == Rational(k + 1, 2 * k));
      CHECK(g[1].angle == Rational(k - 1, 2 * k));
      CHECK(g[2].angle == Rational(l + 1, 2 * l));
      CHECK(g[3].angle == Rational(l - 1, 2 * l));
      const dpw::RelationCheck rc = dpw::generator_relation_check(g);
      CHECK(rc.base_closed);
      CHECK(rc.lift_closed);
      CHECK(rc.ok());
    }
}

TEST_CASE("breaking a lift sign breaks only the lifted relation") {
  dpw::GeneratorData g = dpw::canonical_generators({3, 4});
  g[1].sign_lift = -1;
  const dpw::RelationCheck rc = dpw::generator_relation_check(g);
  CHECK(rc.base_closed);
  CHECK_FALSE(rc.lift_closed);
}

}  // TEST_SUITE
