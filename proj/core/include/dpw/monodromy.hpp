#pragma once

#include <array>

#include "dpw/integrator.hpp"
#include "dpw/loop.hpp"
#include "dpw/path.hpp"
#include "dpw/potential.hpp"

namespace dpw {

/// Monodromy matrices of the four generator loops at a fixed spectral value.
/// Invariants: det m[j] = 1 and m[0] m[1] m[2] m[3] = Id up to integration
/// error, because the loops compose to a contractible loop.
struct MonodromyRep {
  Complex lambda;
  std::array<Matrix2, 4> m;
  Complex basepoint;
};

PoleSystem pole_system_at(const FuchsianPotential& p, Complex lambda);

/// Frame transport Psi along the path, dPsi = Psi eta(lambda), Psi(start) = Id.
Matrix2 integrate_frame(const FuchsianPotential& p, Complex lambda,
                        const PathPolyline& path, double tol = 1e-10);

/// Monodromy along prebuilt petals; reuses the petal geometry across lambda.
MonodromyRep monodromy_from_petals(const PetalSystem& sys,
                                   const FuchsianPotential& p, Complex lambda,
                                   double tol = 1e-10);

MonodromyRep loop_monodromy(const FuchsianPotential& p, Complex lambda,
                            Complex basepoint = Complex(3, 0),
                            double tol = 1e-10);

/// Best invariant hermitian form: minimizes sum_j |M_j^* H M_j - H|_F^2 over
/// unit Frobenius norm hermitian H. residual is the square root of that
/// minimum. positive means H is definite after the trace sign fix; ambiguous
/// flags a near-degenerate minimizer, resolved toward the most positive
/// choice. w is the determinant-one hermitian square root of H when positive.
struct UnitarizerResult {
  Matrix2 h = Matrix2::Identity();
  double residual = 0.0;
  bool positive = false;
  bool ambiguous = false;
  Matrix2 w = Matrix2::Identity();
  double certified = 0.0;
};

UnitarizerResult unitarize(const MonodromyRep& rep);

/// Certified unitarity defect after conjugating by the square root of h:
/// sqrt(sum_j |(W M_j W^-1)^* (W M_j W^-1) - Id|_F^2). Infinite when h is not
/// positive definite. Invariant under simultaneous conjugation of the rep by
/// g with h -> g^-* h g^-1.
double unitary_conjugation_defect(const MonodromyRep& rep, const Matrix2& h);

/// Invariant form refined on the positive cone: starting from unitarize,
/// minimizes the conjugated unitarity defect over definite hermitian forms
/// of determinant one. The minimum is invariant under basepoint change,
/// since conjugating the representation transports the cone bijectively.
struct InvariantForm {
  Matrix2 h = Matrix2::Identity();  // refined form, det 1
  Matrix2 w = Matrix2::Identity();  // hermitian square root of h
  std::array<Matrix2, 4> conjugated;  // w m w^-1
  double defect = 0.0;  // sqrt(sum_j |u_j^* u_j - Id|^2)
  double hinge = 0.0;   // positivity violation of the raw unitarizer
  bool positive = true;
  bool ambiguous = false;
};

InvariantForm best_invariant_form(const MonodromyRep& rep);

/// Traceless hermitian coordinates exp helper: w = exp(sum_a s_a sigma_a / 2),
/// always determinant one. Used to parametrize the positive cone.
Matrix2 hermitian_exp_half(const Eigen::Vector3d& s);
Eigen::Vector3d hermitian_log_coords(const Matrix2& h);

/// Distance of each monodromy matrix to plus or minus the identity. ok needs
/// every distance within tol and an even number of minus signs.
struct SymPointCheck {
  bool ok = false;
  std::array<int, 4> signs{1, 1, 1, 1};
  std::array<double, 4> distances{};
  bool product_ok = false;
};

SymPointCheck sym_point_check(const MonodromyRep& rep, double tol = 1e-8);

}  // namespace dpw
