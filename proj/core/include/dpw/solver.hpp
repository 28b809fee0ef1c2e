#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dpw/monodromy.hpp"
#include "dpw/potential.hpp"
#include "dpw/symmetry.hpp"

namespace dpw {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// H = i (l1 + l2) / (l1 - l2); real for distinct unit-circle points.
double mean_curvature_of(Complex lambda1, Complex lambda2);

/// Puncture layout for the (k,l) family: orders (k, k, l, l) sit at
/// (1, -1, i s, -i s), so equal orders are antipodal and the cyclic order
/// around the circle alternates. s is the conformal modulus of the layout.
std::array<Complex, 4> lawson_punctures(double s = 1.0);

struct ClosingProblem {
  SurfaceParams params{3, 2};
  Complex lambda1{1.0, 0.0};
  Complex lambda2{-1.0, 0.0};
  int circle_samples = 16;  // unit-circle sample count, 0 = Sym points only
  Eigen::VectorXd theta0 = default_theta();
  std::array<Complex, 4> punctures = lawson_punctures();
  Complex basepoint{3.0, 0.0};
  double integrator_tol = 1e-11;
  double target_residual = 1e-9;   // LM keeps going down to this
  double tolerance = 1e-6;         // convergence flag threshold
  int max_iterations = 60;
  bool symmetric_chart = true;     // restrict to the z -> -z even/odd slice
  bool solve_modulus = false;      // add the layout modulus as an unknown
  double modulus = 1.0;
  bool progress = false;           // iteration lines on stderr
};

struct ResidualBreakdown {
  double unitarity = 0.0;       // conjugated unitarity defects over samples
  double positivity = 0.0;      // hinge on indefinite raw forms, diagnostic
                                // only: it is frame-dependent and therefore
                                // kept out of the residual vector
  double sym_relations_1 = 0.0; // relation distances at lambda1
  double sym_relations_2 = 0.0; // relation distances at lambda2
  double chart_margin = 0.0;    // soft barrier against chart degeneration
};

/// Z2 character per Sym point: signs of (M1 M2, M3 M4, M1 M3 vs M3 M1).
using SymSigns = std::array<std::array<int, 3>, 2>;

struct SignState {
  SymSigns signs{{{1, 1, 1}, {1, 1, 1}}};
  bool frozen = false;
};

struct SolverReport {
  Eigen::VectorXd theta;
  double modulus = 1.0;
  double residual_norm = 0.0;
  ResidualBreakdown breakdown;
  int iterations = 0;
  bool converged = false;
  SymSigns sym_signs{{{1, 1, 1}, {1, 1, 1}}};
  bool rank_deficient = false;
  double verification_residual = -1.0;  // dense-sample recheck after solve
  int verification_samples = 0;
  std::vector<double> history;
};

/// Closing residual vector. Blocks: per-sample per-generator unitarity
/// defect norms after the best invariant-form conjugation; Sym-point
/// relation distances against the sign character (minimized over admissible
/// signs unless a frozen SignState is supplied); chart margin barrier.
/// Every block is a norm of a word in the conjugated generators, so the
/// vector is invariant under basepoint change; positivity enters through
/// the positive-cone constraint of the invariant form, not as an entry.
Eigen::VectorXd residual(const ClosingProblem& problem,
                         const Eigen::VectorXd& theta,
                         SignState* signs = nullptr,
                         ResidualBreakdown* breakdown = nullptr);

SolverReport solve(const ClosingProblem& problem);

struct ContinuationStep {
  double t = 0.0;
  SolverReport report;
};

/// Homotopy driver: solves at t = 0, then walks t to 1 with adaptive step
/// halving, seeding each step with the previous solution. Stops early with
/// the truncated list when the step underflows.
std::vector<ContinuationStep> continuation(
    const std::function<ClosingProblem(double)>& family,
    double initial_step = 0.25, double min_step = 1e-3);

}  // namespace dpw
