#include <doctest.h>

#include <cmath>
#include <random>

#include "dpw/monodromy.hpp"

using dpw::Complex;
using dpw::Matrix2;

namespace {

Matrix2 random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  Matrix2 m;
  m << Complex(q(0), q(3)), Complex(q(2), q(1)), Complex(-q(2), q(1)),
      Complex(q(0), -q(3));
  return m;
}

Matrix2 random_conjugator(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> uni(-spread, spread);
  Matrix2 g;
  do {
    g << Complex(1 + uni(rng), uni(rng)), Complex(uni(rng), uni(rng)),
        Complex(uni(rng), uni(rng)), Complex(1 + uni(rng), uni(rng));
  } while (std::abs(g.determinant()) < 0.2);
  return g / std::sqrt(std::abs(g.determinant()));
}

dpw::MonodromyRep unitarizable_rep(std::mt19937_64& rng, double spread) {
  dpw::MonodromyRep rep;
  rep.m[0] = random_su2(rng);
  rep.m[1] = random_su2(rng);
  rep.m[2] = random_su2(rng);
  rep.m[3] = (rep.m[0] * rep.m[1] * rep.m[2]).inverse();
  const Matrix2 g = random_conjugator(rng, spread);
  const Matrix2 gi = g.inverse();
  for (auto& m : rep.m) m = g * m * gi;
  return rep;
}

}  // namespace

TEST_SUITE("monodromy") {

TEST_CASE("generator monodromies carry the branch structure") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> uni(-0.04, 0.04);
  for (const dpw::SurfaceParams params :
       {dpw::SurfaceParams{3, 3}, dpw::SurfaceParams{3, 4}}) {
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd theta = dpw::default_theta();
      if (trial > 0)
        for (int i = 0; i < theta.size(); ++i) theta(i) += uni(rng);
      const auto pot = dpw::build_potential(params, theta);
      for (int s = 0; s < 3; ++s) {
        const Complex lambda = std::polar(1.0, 2 * M_PI * (s + 0.3) / 3.0);
        const auto rep = dpw::loop_monodromy(pot, lambda);
        Matrix2 prod = Matrix2::Identity();
        for (int j = 0; j < 4; ++j) {
          prod = prod * rep.m[j];
          CHECK(std::abs(rep.m[j].determinant() - Complex(1, 0)) < 1e-8);
          const double want =
              2.0 * std::abs(std::cos(M_PI / pot.branch[j].order));
          CHECK(std::abs(std::abs(rep.m[j].trace()) - want) < 1e-8);
        }
        CHECK((prod - Matrix2::Identity()).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("monodromy is conjugated, never changed, by the basepoint") {
  const auto pot = dpw::build_potential({3, 2}, dpw::default_theta());
  const Complex lambda(0.6, 0.8);
  const auto rep1 = dpw::loop_monodromy(pot, lambda, Complex(3, 0));
  const auto rep2 = dpw::loop_monodromy(pot, lambda, Complex(0.2, 2.5));
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(rep1.m[j].trace() - rep2.m[j].trace()) < 1e-8);
}

TEST_CASE("petal reuse matches the one shot monodromy") {
  const auto pot = dpw::build_potential({3, 3}, dpw::default_theta());
  const auto petals =
      dpw::standard_petals(pot.punctures, Complex(3, 0));
  const Complex lambda(0, 1);
  const auto a = dpw::monodromy_from_petals(petals, pot, lambda);
  const auto b = dpw::loop_monodromy(pot, lambda, Complex(3, 0));
  for (int j = 0; j < 4; ++j) CHECK((a.m[j] - b.m[j]).norm() < 1e-9);
}

TEST_CASE("unitarizer recovers conjugated unitary quadruples") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rep = unitarizable_rep(rng, 0.35);
    const auto res = dpw::unitarize(rep);
    REQUIRE(res.positive);
    CHECK(res.residual < 1e-10);
    CHECK(std::abs(res.w.determinant() - Complex(1, 0)) < 1e-10);
    CHECK((res.w - res.w.adjoint()).norm() < 1e-10);
    const Matrix2 wi = res.w.inverse();
    for (int j = 0; j < 4; ++j) {
      const Matrix2 u = res.w * rep.m[j] * wi;
      CHECK((u.adjoint() * u - Matrix2::Identity()).norm() < 1e-8);
    }
  }
}

TEST_CASE("hyperbolic monodromy is rejected") {
  dpw::MonodromyRep rep;
  Matrix2 h;
  h << Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(0.5, 0);
  rep.m[0] = h;
  rep.m[1] = h.inverse();
  rep.m[2] = Matrix2::Identity();
  rep.m[3] = Matrix2::Identity();
  const auto res = dpw::unitarize(rep);
  CHECK_FALSE(res.positive);
}

TEST_CASE("elliptic pair with a shared axis stays unitarizable") {
  // commuting rotations around one axis give a degenerate but positive form
  std::mt19937_64 rng(59);
  dpw::MonodromyRep rep;
  Matrix2 r;
  r << std::polar(1.0, 0.7), Complex(0, 0), Complex(0, 0),
      std::polar(1.0, -0.7);
  Matrix2 r2;
  r2 << std::polar(1.0, 0.3), Complex(0, 0), Complex(0, 0),
      std::polar(1.0, -0.3);
  rep.m[0] = r;
  rep.m[1] = r2;
  rep.m[2] = r.inverse();
  rep.m[3] = r2.inverse();
  const auto res = dpw::unitarize(rep);
  CHECK(res.positive);
  CHECK(res.residual < 1e-10);
}

TEST_CASE("invariant form does not depend on the conjugating frame") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    dpw::MonodromyRep rep = unitarizable_rep(rng, 0.3);
    // push it slightly off the unitarizable locus
    std::uniform_real_distribution<double> uni(-3e-3, 3e-3);
    for (auto& m : rep.m)
      m(0, 1) += Complex(uni(rng), uni(rng));
    const auto base = dpw::best_invariant_form(rep);
    const Matrix2 g = random_conjugator(rng, 0.4);
    const Matrix2 gi = g.inverse();
    dpw::MonodromyRep moved;
    for (int j = 0; j < 4; ++j) moved.m[j] = g * rep.m[j] * gi;
    const auto other = dpw::best_invariant_form(moved);
    CHECK(other.defect ==
          doctest::Approx(base.defect).epsilon(1e-4).scale(1e-10));
    CHECK(other.hinge ==
          doctest::Approx(base.hinge).epsilon(1e-4).scale(1e-10));
  }
}

TEST_CASE("hermitian exponential chart round trips") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> uni(-1.2, 1.2);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Vector3d s(uni(rng), uni(rng), uni(rng));
    const Matrix2 w = dpw::hermitian_exp_half(s);
    CHECK((w - w.adjoint()).norm() < 1e-12);
    CHECK(std::abs(w.determinant() - Complex(1, 0)) < 1e-12);
    const Eigen::Vector3d back = dpw::hermitian_log_coords(w * w);
    CHECK((back - s).norm() < 1e-9);
  }
  CHECK((dpw::hermitian_exp_half(Eigen::Vector3d::Zero()) -
         Matrix2::Identity())
            .norm() < 1e-14);
}

TEST_CASE("sign characters are recognized at the Sym points") {
  dpw::MonodromyRep rep;
  for (auto& m : rep.m) m = Matrix2::Identity();
  auto check = dpw::sym_point_check(rep);
  CHECK(check.ok);
  for (int s : check.signs) CHECK(s == 1);
  for (double d : check.distances) CHECK(d < 1e-14);

  // an even number of minus signs is a valid character
  rep.m[0] = -Matrix2::Identity();
  rep.m[1] = -Matrix2::Identity();
  check = dpw::sym_point_check(rep);
  CHECK(check.ok);
  CHECK(check.signs[0] == -1);
  CHECK(check.signs[1] == -1);
  CHECK(check.signs[2] == 1);
  CHECK(check.signs[3] == 1);

  // an odd number violates the loop relation even though each factor
  // is exactly central
  rep.m[1] = Matrix2::Identity();
  check = dpw::sym_point_check(rep);
  CHECK_FALSE(check.ok);
  CHECK_FALSE(check.product_ok);
  for (double d : check.distances) CHECK(d < 1e-14);

  // a non-central generator is rejected and its distance reported
  rep.m[1] = -Matrix2::Identity();
  Matrix2 r;
  r << std::polar(1.0, 0.7), Complex(0, 0), Complex(0, 0),
      std::polar(1.0, -0.7);
  rep.m[2] = r;
  check = dpw::sym_point_check(rep);
  CHECK_FALSE(check.ok);
  CHECK(check.distances[2] > 0.1);
}

}  // TEST_SUITE
