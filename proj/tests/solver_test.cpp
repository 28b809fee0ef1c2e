#include <doctest.h>

#include <cmath>
#include <random>

#include "dpw/solver.hpp"

using dpw::Complex;

TEST_SUITE("solver") {

TEST_CASE("sym point mean curvature values") {
  CHECK(dpw::mean_curvature_of(Complex(1, 0), Complex(0, 1)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(dpw::mean_curvature_of(Complex(1, 0), Complex(-1, 0)) ==
        doctest::Approx(0.0).scale(1.0));
  // cot of the half angle between the two points
  const double a = 0.9, b = 2.3;
  CHECK(dpw::mean_curvature_of(std::polar(1.0, a), std::polar(1.0, b)) ==
        doctest::Approx(1.0 / std::tan((a - b) / 2)).epsilon(1e-10));
}

TEST_CASE("mean curvature vanishes exactly on antipodal pairs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0, 2 * M_PI);
  for (int trial = 0; trial < 100; ++trial) {
    const Complex l1 = std::polar(1.0, uni(rng));
    const Complex l2 = std::polar(1.0, uni(rng));
    if (std::abs(l1 + l2) < 1e-9) continue;
    const double h = dpw::mean_curvature_of(l1, l2);
    CHECK(std::isfinite(h));
    // antipodal is the only zero
    CHECK((std::abs(h) < 1e-9) == (std::abs(l1 + l2) < 1e-9));
    CHECK(std::abs(dpw::mean_curvature_of(l1, -l1)) < 1e-12);
  }
}

TEST_CASE("puncture layout of the closing family") {
  const auto z = dpw::lawson_punctures();
  CHECK(z[0] == Complex(1, 0));
  CHECK(z[1] == Complex(-1, 0));
  CHECK(z[2] == Complex(0, 1));
  CHECK(z[3] == Complex(0, -1));
  const auto zs = dpw::lawson_punctures(1.7);
  CHECK(std::abs(zs[2] - Complex(0, 1.7)) < 1e-15);
  CHECK(std::abs(zs[3] + Complex(0, 1.7)) < 1e-15);
  // equal orders antipodal, layout alternates around the circle
  CHECK(std::abs(z[0] + z[1]) == 0.0);
  CHECK(std::abs(z[2] + z[3]) == 0.0);
}

TEST_CASE("residual layout and input validation") {
  dpw::ClosingProblem pr;
  pr.circle_samples = 0;
  pr.integrator_tol = 1e-9;
  const Eigen::VectorXd r = dpw::residual(pr, pr.theta0);
  CHECK(r.size() == 2 * 4 + 6 + 4);
  CHECK(r.allFinite());
  Eigen::VectorXd bad(5);
  bad.setZero();
  CHECK_THROWS_AS(dpw::residual(pr, bad), dpw::SolverError);
}

TEST_CASE("sign state freezes after the first evaluation") {
  dpw::ClosingProblem pr;
  pr.circle_samples = 0;
  pr.integrator_tol = 1e-9;
  dpw::SignState signs;
  const Eigen::VectorXd r1 = dpw::residual(pr, pr.theta0, &signs);
  CHECK(signs.frozen);
  const Eigen::VectorXd r2 = dpw::residual(pr, pr.theta0, &signs);
  CHECK((r1 - r2).norm() == 0.0);
}

TEST_CASE("residual is invariant under basepoint moves") {
  dpw::ClosingProblem pr;
  pr.circle_samples = 4;
  pr.integrator_tol = 1e-11;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-0.02, 0.02);
  Eigen::VectorXd theta = pr.theta0;
  for (int i = 0; i < theta.size(); ++i) theta(i) += uni(rng);

  dpw::SignState signs;
  dpw::ResidualBreakdown bd1, bd2;
  const Eigen::VectorXd r1 = dpw::residual(pr, theta, &signs, &bd1);
  pr.basepoint = Complex(0.3, 2.4);
  const Eigen::VectorXd r2 = dpw::residual(pr, theta, &signs, &bd2);
  REQUIRE(r1.size() == r2.size());
  CHECK((r1 - r2).lpNorm<Eigen::Infinity>() < 10 * 1e-8);
  CHECK(std::abs(bd1.unitarity - bd2.unitarity) < 1e-7);
  CHECK(std::abs(bd1.sym_relations_1 - bd2.sym_relations_1) < 1e-7);
  CHECK(std::abs(bd1.sym_relations_2 - bd2.sym_relations_2) < 1e-7);
}

TEST_CASE("degenerate evaluation points are rejected") {
  dpw::ClosingProblem pr;
  pr.lambda2 = pr.lambda1;
  CHECK_THROWS_AS(dpw::solve(pr), dpw::SolverError);
  dpw::ClosingProblem off;
  off.lambda1 = Complex(0.5, 0);
  CHECK_THROWS_AS(dpw::solve(off), dpw::SolverError);
}

TEST_CASE("breakdown fields compose the residual norm") {
  dpw::ClosingProblem pr;
  pr.circle_samples = 0;
  pr.integrator_tol = 1e-9;
  dpw::ResidualBreakdown bd;
  const Eigen::VectorXd r = dpw::residual(pr, pr.theta0, nullptr, &bd);
  // positivity is a frame-dependent diagnostic and stays out of the vector
  const double total =
      bd.unitarity * bd.unitarity + bd.sym_relations_1 * bd.sym_relations_1 +
      bd.sym_relations_2 * bd.sym_relations_2 +
      bd.chart_margin * bd.chart_margin;
  CHECK(total == doctest::Approx(r.squaredNorm()).epsilon(1e-9));
}

}  // TEST_SUITE
