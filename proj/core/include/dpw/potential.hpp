#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpw/loop.hpp"
#include "dpw/symmetry.hpp"

namespace dpw {

struct PotentialError : std::runtime_error {
  explicit PotentialError(const std::string& what) : std::runtime_error(what) {}
};

/// Traceless Fuchsian connection family with four simple poles,
/// residues A_j(lambda) = lambda^{-1} N_j + B_j + lambda C_j.
/// Eigenvalues of A_j are pinned to +-rho_j for every lambda.
struct FuchsianPotential {
  SurfaceParams params;
  std::array<Complex, 4> punctures;
  std::array<LaurentMatrixLoop, 4> residues;
  BranchData branch;
  bool traceless_twist = true;  // eigenvalue pair shifted by -1/2 to +-rho
  Eigen::VectorXd theta;        // accessory chart offset used to build this

  Matrix2 residue_coefficient(int j, int degree) const;
  Matrix2 eval_residue(int j, Complex lambda) const;
  Matrix2 higgs_residue(int j) const { return residue_coefficient(j, -1); }
};

/// Real dimension of the accessory chart (six complex offsets).
constexpr int kAccessoryDimension = 12;

std::array<Complex, 4> default_punctures();
Eigen::VectorXd default_theta();

/// Accessory chart. theta holds six complex offsets, packed (re, im):
/// x0, x1, y0, y1 deform the kernel section pair x(z) = 1 + x0 + x1 z,
/// y(z) = y0 + (1 + y1) z; t moves along the one-parameter family of
/// lambda^0 completions; sigma scales the lambda^1 coefficient C_j = sigma N_j.
/// All type invariants hold by construction; the only elimination step is a
/// minimum-norm solve for the lambda^0 completion, singular exactly when the
/// Higgs residues degenerate.
FuchsianPotential build_potential(const SurfaceParams& params,
                                  const Eigen::VectorXd& theta,
                                  const std::array<Complex, 4>& punctures,
                                  int trunc = 1);
FuchsianPotential build_potential(const SurfaceParams& params,
                                  const Eigen::VectorXd& theta);

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  const ValidationCheck* find(const std::string& name) const;
};

ValidationReport validate(const FuchsianPotential& p, double tol = 1e-10);

struct ParabolicDatum {
  Rational weight_low;
  Rational weight_high;
  Eigen::Vector2cd line;  // eigenline of the lambda^0 residue for +rho
};
using ParabolicData = std::array<ParabolicDatum, 4>;

ParabolicData parabolic_data(const FuchsianPotential& p);
Eigen::Vector2cd parabolic_line_at(const FuchsianPotential& p, int j,
                                   Complex lambda);

Rational pardeg_line(int line_degree, const std::array<bool, 4>& hits,
                     const BranchData& branch);

struct StabilityReport {
  Rational parabolic_degree;  // -(sum of both weights), -4 for all (k,l)
  int kernel_line_degree = 0;
  Rational kernel_line_pardeg;
  bool stable = false;
  std::array<bool, 4> hits{};  // kernel line meets the parabolic line at z_j
  int cleared_degree = 0;      // max entry degree of the cleared section
};

/// Kernel line of the Higgs field as a polynomial section, gcd-cleared.
/// entries[i] lists coefficients of entry i by ascending degree.
struct KernelSection {
  std::array<std::vector<Complex>, 2> entries;
  int degree = 0;
};

KernelSection kernel_section_of(const std::array<Matrix2, 4>& higgs_residues,
                                const std::array<Complex, 4>& punctures,
                                double tol = 1e-9);

StabilityReport kernel_line_report(const FuchsianPotential& p,
                                   double tol = 1e-9);

/// Evaluation form consumed by the transport integrator and by reports:
/// eta(z, lambda) = sum_j A_j(lambda)/(z - z_j) dz.
struct DpwForm {
  std::array<Complex, 4> punctures;
  std::array<LaurentMatrixLoop, 4> residues;

  Matrix2 eval(Complex z, Complex lambda) const;
  std::array<Matrix2, 4> residues_at(Complex lambda) const;
  Matrix2 higgs(Complex z) const;
};

DpwForm dpw_gauge_form(const FuchsianPotential& p);

}  // namespace dpw
