#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpw/monodromy.hpp"
#include "dpw/potential.hpp"

namespace dpw {

struct SurfaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Log-polar tensor grid over the puncture sphere, cut open along three
/// slits chaining the punctures in ccw order so the remaining region is
/// simply connected. Vertices on a slit appear twice, once per bank:
/// plus_vertex on the left of the oriented cut, minus_vertex on the right.
/// Crossing slit c from the minus bank to the plus bank multiplies the
/// sheet by the cut's deck element.
struct FundamentalDomainGrid {
  std::vector<Complex> samples;
  std::vector<std::array<int, 3>> triangles;
  double puncture_clearance = 0.0;
  std::array<Complex, 4> punctures{};
  struct SlitPair {
    int minus_vertex = -1;
    int plus_vertex = -1;
    int cut = -1;  // 0, 1, 2
  };
  std::vector<SlitPair> slits;
  int basepoint_vertex = -1;
};

struct GridOptions {
  double clearance = 0.02;  // innermost graded ring distance to punctures
  double grading = 0.7;     // geometric refinement ratio toward punctures
  int angular = 48;         // coarse azimuthal resolution
  int radial = 9;           // coarse radial rings per side of the unit circle
  int graded_layers = 10;   // refinement layers around each puncture
  double far_radius = 1e4;  // stand-in vertex for the point at infinity
};

FundamentalDomainGrid build_domain_grid(const std::array<Complex, 4>& punctures,
                                        Complex basepoint,
                                        const GridOptions& options = {});

/// One surface sample: domain point, the two unitary frames (gauged
/// transports at the Sym points), and the immersion point f = frame1 times
/// the inverse of frame2, stored as a quaternion (unit vector in R^4).
struct ImmersionSample {
  Complex z;
  Matrix2 frame1 = Matrix2::Identity();
  Matrix2 frame2 = Matrix2::Identity();
  Eigen::Vector4d f = Eigen::Vector4d::UnitX();
};

struct SurfaceMesh {
  std::vector<ImmersionSample> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::string> deck_labels;  // per vertex group word
};

Eigen::Vector4d quaternion_of(const Matrix2& f);
Matrix2 matrix_of(const Eigen::Vector4d& q);

/// Unitarized deck data: per cut and per generator loop, the SU(2) pair
/// acting on the immersion by f -> a f b^{-1}.
struct DeckAction {
  std::array<Matrix2, 3> cut_a{Matrix2::Identity(), Matrix2::Identity(),
                               Matrix2::Identity()};
  std::array<Matrix2, 3> cut_b{Matrix2::Identity(), Matrix2::Identity(),
                               Matrix2::Identity()};
  std::array<Matrix2, 4> gen_a{};
  std::array<Matrix2, 4> gen_b{};
};

struct ReconstructOptions {
  int lambda_samples = 64;   // circle sampling for the gauge factorization
  double tol = 1e-9;         // integrator tolerance for the transports
  int alt_path_checks = 20;  // spot checks of path independence
};

struct ReconstructionResult {
  SurfaceMesh mesh;  // fundamental sheet
  DeckAction deck;
  double unit_defect = 0.0;       // max | |f| - 1 | over vertices
  double path_dependence = 0.0;   // alternative-path frame deviation
  double dressing_defect = 0.0;   // unitarity defect of dressed monodromy
};

/// Builds the immersion over the fundamental sheet: transports the frame to
/// every grid vertex across circle samples, dresses by the per-sample
/// unitarizer square roots, splits off the unitary factor pointwise, and
/// evaluates the two Sym-point frames. Requires central monodromy at both
/// Sym points.
ReconstructionResult reconstruct(const FuchsianPotential& p, Complex lambda1,
                                 Complex lambda2,
                                 const FundamentalDomainGrid& grid,
                                 const ReconstructOptions& options = {});

struct TileResult {
  SurfaceMesh mesh;
  double mismatch = 0.0;  // max slit-vertex disagreement between sheets
  int sheets = 1;
  bool closed = false;  // sheet orbit closed before the depth limit
};

/// Copies the fundamental sheet across deck words up to the given length,
/// gluing sheets along the slits and merging coincident slit vertices.
/// Slit mismatch beyond consistency_tol means a wrong deck element rather
/// than accumulated noise and raises an error naming the group word.
TileResult tile(const ReconstructionResult& fundamental,
                const FundamentalDomainGrid& grid, int depth,
                double consistency_tol = 1e-4);

struct DiagnosticsReport {
  double area = 0.0;
  double h_mean = 0.0;
  double h_std = 0.0;
  double h_reference = 0.0;  // Sym-point value for comparison
  int h_samples = 0;
  int degenerate_faces = 0;
  double max_norm_defect = 0.0;
  long euler_characteristic = 0;
  int boundary_components = 0;
  int genus_estimate = -1;
};

/// Area by spherical excess of the face triangles, mean curvature by local
/// quadratic fits in normal coordinates, topology from mesh combinatorics.
DiagnosticsReport diagnostics(const SurfaceMesh& mesh, Complex lambda1,
                              Complex lambda2);

/// Analytic test meshes: a great 2-sphere and the square Clifford torus.
SurfaceMesh sample_sphere_mesh(int n);
SurfaceMesh sample_clifford_mesh(int n);

}  // namespace dpw
