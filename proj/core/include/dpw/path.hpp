#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpw/loop.hpp"

namespace dpw {

struct PathError : std::runtime_error {
  explicit PathError(const std::string& what, int segment = -1)
      : std::runtime_error(what), segment(segment) {}
  int segment;
};

/// Piecewise-linear path in the punctured plane. clearance is the minimal
/// distance from any segment to any of the holes it was built against.
struct PathPolyline {
  std::vector<Complex> vertices;
  double clearance = 0.0;

  bool closed() const;
  Complex start() const { return vertices.front(); }
  Complex end() const { return vertices.back(); }
};

double segment_point_distance(Complex a, Complex b, Complex p);

double polyline_clearance(const std::vector<Complex>& vertices,
                          const std::vector<Complex>& holes);

/// Validates consecutive-distinct vertices and positive clearance.
PathPolyline make_polyline(std::vector<Complex> vertices,
                           const std::vector<Complex>& holes);

PathPolyline reversed(const PathPolyline& p);
PathPolyline joined(const PathPolyline& a, const PathPolyline& b);

/// Counterclockwise regular polygon around center through angle range
/// [phase, phase + 2 pi], first vertex at center + radius e^{i phase}.
PathPolyline circle_polygon(Complex center, double radius, int segments,
                            double phase, const std::vector<Complex>& holes);

/// Total winding of a closed polyline around a point off the path.
int winding_number(const PathPolyline& path, Complex around);

/// One petal per puncture: an arc along the basepoint circle to the
/// puncture's angular position, a radial leg inward, a counterclockwise
/// polygon of radius r = half the minimal pairwise puncture distance, and
/// the reverse way back. Petals only meet along shared trunk pieces.
struct PetalSystem {
  std::array<PathPolyline, 4> petals;   // in puncture index order
  std::array<int, 4> ccw_position;      // position of puncture j in ccw order
  std::array<int, 4> ccw_index;         // puncture index at ccw position m
  double radius = 0.0;
  Complex basepoint;
};

PetalSystem standard_petals(const std::array<Complex, 4>& punctures,
                            Complex basepoint, int circle_segments = 48);

/// Index-ordered generator loops: petal conjugated by earlier-in-ccw petals
/// of later index, so the index-ordered composite loop is contractible in
/// the complement of the punctures (regular at infinity).
std::array<PathPolyline, 4> standard_loops(
    const std::array<Complex, 4>& punctures, Complex basepoint,
    int circle_segments = 48);

}  // namespace dpw
